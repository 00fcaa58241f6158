#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "sheatlab/errors.hpp"

namespace sheatlab {

/// Uniform space-time grid on [x_min, x_max) x [0, t_end] plus the viscosity.
///
/// Grid points are x_i = x_min + i dx for i in [0, n_cells()); x_max is the
/// periodic image of x_min (or the Dirichlet ghost). The explicit scheme for
/// du = (kappa/2) u_xx dt + sigma(u) dW is monotone when kappa dt / dx^2 <= 1.
struct GridSpec {
  double kappa{1.0};
  double dt{1e-3};
  double dx{0.05};
  double x_min{-8.0};
  double x_max{8.0};
  double t_end{1.0};

  static constexpr double kIntegerTolerance = 1e-9;

  /// Diffusion number r = kappa dt / (2 dx^2) multiplying the second difference.
  double diffusion_number() const { return kappa * dt / (2.0 * dx * dx); }

  std::size_t n_cells() const { return static_cast<std::size_t>(std::llround((x_max - x_min) / dx)); }
  std::size_t n_steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  double width() const { return x_max - x_min; }

  void validate() const {
    if (!(kappa > 0.0)) throw ConfigError("grid.kappa", "must be > 0");
    if (!(dt > 0.0)) throw ConfigError("grid.dt", "must be > 0");
    if (!(dx > 0.0)) throw ConfigError("grid.dx", "must be > 0");
    if (!(t_end >= 0.0)) throw ConfigError("grid.t_end", "must be >= 0");
    if (!(x_max > x_min)) throw ConfigError("grid.x_max", "must exceed grid.x_min");
    if (!std::isfinite(x_min) || !std::isfinite(x_max)) throw ConfigError("grid.x_min", "domain must be finite");
    if (kappa * dt / (dx * dx) > 1.0 + 1e-12) {
      throw ConfigError("kappa*dt/dx^2",
                        "explicit scheme requires kappa*dt/dx^2 <= 1, got " + std::to_string(kappa * dt / (dx * dx)));
    }
    if (!is_integral((x_max - x_min) / dx)) {
      throw ConfigError("grid.dx", "(x_max - x_min)/dx must be an integer");
    }
    if (t_end > 0.0 && !is_integral(t_end / dt)) {
      throw ConfigError("grid.dt", "t_end/dt must be an integer");
    }
    if (n_cells() < 3) throw ConfigError("grid.dx", "grid needs at least 3 cells");
  }

private:
  static bool is_integral(double v) {
    const double r = std::round(v);
    return std::abs(v - r) <= kIntegerTolerance * std::max(1.0, std::abs(v));
  }
};

}  // namespace sheatlab
