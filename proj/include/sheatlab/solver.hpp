#pragma once

// Explicit finite-difference integrator for
//
//   du = (kappa/2) u_xx dt + sigma(u) W(dt dx),   u_0 = const,
//
// one step being
//
//   u_i <- u_i + r (u_{i+1} - 2 u_i + u_{i-1}) + sigma(u_i) dW_i / dx,
//
// with r = kappa dt / (2 dx^2) and dW_i ~ N(0, dt dx). The localized variant
// restricts the stencil to blocks of a partition: a neighbour in another
// block is replaced by the flat value 1, so the perturbation u - 1 receives
// no contribution from outside the block, and each block is driven only by
// the noise on its own cells.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sheatlab/errors.hpp"
#include "sheatlab/grid.hpp"
#include "sheatlab/noise.hpp"
#include "sheatlab/sigma.hpp"

namespace sheatlab {

enum class Boundary { periodic, dirichlet_one };

/// How the block partition evolves during a localized solve.
///  - frozen:  the plan's partition (scale beta sqrt(plan.t)) is used at every step.
///  - growing: step n -> n+1 uses the partition of scale beta sqrt(t_{n+1}), so
///             the field at time s is localized to blocks of its own time, as in
///             U_s(y) = 1 + int_{(0,s) x I_s(y)} p sigma(U) dW.
enum class PartitionSchedule { frozen, growing };

/// Noise feeding a localized solve.
///  - per_block: block b of the plan draws from derive_stream(seed, rep, b).
///  - shared:    every block reads the replicate's global sheet (block id 0),
///               restricted to its own cells. Required for coupling with solve().
enum class BlockNoise { per_block, shared };

struct Localization {
  BlockPlan plan;
  PartitionSchedule schedule{PartitionSchedule::frozen};
  BlockNoise noise{BlockNoise::per_block};
};

struct Field {
  std::vector<double> values;
  double t{0.0};
  GridSpec grid;

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t i) const { return grid.x(i); }
};

struct RunConfig {
  GridSpec grid;
  SigmaSpec sigma;
  std::uint64_t master_seed{0};
  std::uint32_t replicate_id{0};
  Boundary boundary{Boundary::periodic};
  std::optional<Localization> localization;

  void validate() const {
    grid.validate();
    sigma.validate();
    if (localization) {
      const auto& loc = *localization;
      if (loc.plan.cell_block.size() != grid.n_cells()) {
        throw ConfigError("localization.beta", "block plan was built for a different grid");
      }
      if (grid.t_end > 0.0 && loc.plan.beta * std::sqrt(grid.t_end) < 2.0 * grid.dx) {
        throw ConfigError("localization.beta", "beta*sqrt(t_end) must be >= 2*dx");
      }
      if (loc.schedule == PartitionSchedule::growing && loc.noise == BlockNoise::per_block) {
        throw ConfigError("localization.noise", "a growing partition needs shared noise");
      }
    }
  }
};

namespace detail {

inline constexpr std::size_t kAllFinite = std::numeric_limits<std::size_t>::max();

/// One explicit step from u into out. `block` (optional) holds a block label
/// per cell; neighbours with a different label read as 1. Returns the first
/// non-finite cell or kAllFinite.
template <class Sigma>
std::size_t advance_row(std::span<const double> u, std::span<const double> dW, std::span<double> out, double r,
                        double inv_dx, Boundary bc, const Sigma& sigma, std::span<const long> block = {}) {
  const std::size_t n = u.size();
  const bool periodic = bc == Boundary::periodic;
  auto edge_value = [&](std::size_t i, std::size_t nb) {
    if (!periodic) return 1.0;
    if (!block.empty() && block[nb] != block[i]) return 1.0;
    return u[nb];
  };
  bool finite = true;
  auto update = [&](std::size_t i, double left, double right) {
    const double v = u[i] + r * (left - 2.0 * u[i] + right) + sigma(u[i]) * dW[i] * inv_dx;
    out[i] = v;
    finite &= std::isfinite(v);
  };

  update(0, edge_value(0, n - 1), block.empty() || block[1] == block[0] ? u[1] : 1.0);
  if (block.empty()) {
    for (std::size_t i = 1; i + 1 < n; ++i) update(i, u[i - 1], u[i + 1]);
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double left = block[i - 1] == block[i] ? u[i - 1] : 1.0;
      const double right = block[i + 1] == block[i] ? u[i + 1] : 1.0;
      update(i, left, right);
    }
  }
  update(n - 1, block.empty() || block[n - 2] == block[n - 1] ? u[n - 2] : 1.0, edge_value(n - 1, 0));

  if (finite) return kAllFinite;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(out[i])) return i;
  }
  return kAllFinite;
}

template <class Sigma>
void advance_checked(std::span<const double> u, std::span<const double> dW, std::span<double> out,
                     const GridSpec& grid, Boundary bc, const Sigma& sigma, std::size_t step,
                     std::span<const long> block = {}) {
  const std::size_t bad = advance_row(u, dW, out, grid.diffusion_number(), 1.0 / grid.dx, bc, sigma, block);
  if (bad != kAllFinite) throw NonFinite(step, bad, out[bad]);
}

inline void fill_block_labels(const GridSpec& grid, double width, std::vector<long>& labels) {
  labels.resize(grid.n_cells());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = BlockPlan::label(grid.x(i), width);
}

inline std::vector<long> frozen_labels(const BlockPlan& plan) {
  return {plan.cell_block.begin(), plan.cell_block.end()};
}

/// Noise row for a localized solve with per-block streams.
inline void fill_block_increments(const GridSpec& grid, const RunConfig& cfg, const BlockPlan& plan, std::size_t step,
                                  std::span<double> row) {
  for (std::size_t b = 0; b < plan.size(); ++b) {
    const auto stream = derive_stream(cfg.master_seed, cfg.replicate_id, static_cast<std::uint32_t>(b));
    fill_increments(grid, stream, step, plan.first_cell[b], row.subspan(plan.first_cell[b], plan.cell_count[b]));
  }
}

struct NoObserver {
  template <class... Args>
  void operator()(Args&&...) const noexcept {}
};

}  // namespace detail

/// Advances `field` by one time step with the given increments dW (variance dt dx per cell).
inline Field step(const Field& field, std::span<const double> noise, const SigmaSpec& sigma,
                  Boundary boundary = Boundary::periodic) {
  field.grid.validate();
  if (noise.size() != field.size()) throw std::invalid_argument("step: noise row does not match grid width");
  Field next{std::vector<double>(field.size()), field.t + field.grid.dt, field.grid};
  const auto index = static_cast<std::size_t>(std::llround(field.t / field.grid.dt));
  visit_sigma(sigma, [&](const auto& s) {
    detail::advance_checked(field.values, noise, next.values, field.grid, boundary, s, index);
  });
  return next;
}

/// Evolves u_0 = u0 to grid.t_end. `observer(step, t, values)` runs after
/// every step (step counts from 1).
template <class Observer = detail::NoObserver>
Field solve_from_constant(const RunConfig& cfg, double u0, Observer&& observer = {}) {
  cfg.validate();
  const GridSpec& grid = cfg.grid;
  const std::size_t n = grid.n_cells();
  const std::size_t steps = grid.n_steps();
  std::vector<double> u(n, u0), next(n), dW(n);
  const auto stream = derive_stream(cfg.master_seed, cfg.replicate_id, 0);
  visit_sigma(cfg.sigma, [&](const auto& s) {
    for (std::size_t k = 0; k < steps; ++k) {
      fill_increments(grid, stream, k, 0, dW);
      detail::advance_checked(u, dW, next, grid, cfg.boundary, s, k);
      u.swap(next);
      observer(k + 1, static_cast<double>(k + 1) * grid.dt, std::span<const double>(u));
    }
  });
  return Field{std::move(u), static_cast<double>(steps) * grid.dt, grid};
}

/// Solution of the flat-data equation (u_0 = 1) at grid.t_end.
template <class Observer = detail::NoObserver>
Field solve(const RunConfig& cfg, Observer&& observer = {}) {
  return solve_from_constant(cfg, 1.0, std::forward<Observer>(observer));
}

/// Localized solution U^(beta) at grid.t_end; cfg.localization must be set.
template <class Observer = detail::NoObserver>
Field solve_localized(const RunConfig& cfg, Observer&& observer = {}) {
  if (!cfg.localization) throw ConfigError("localization", "solve_localized needs a block plan");
  cfg.validate();
  const GridSpec& grid = cfg.grid;
  const Localization& loc = *cfg.localization;
  const std::size_t n = grid.n_cells();
  const std::size_t steps = grid.n_steps();
  std::vector<double> u(n, 1.0), next(n), dW(n);
  std::vector<long> labels = detail::frozen_labels(loc.plan);
  const auto shared = derive_stream(cfg.master_seed, cfg.replicate_id, 0);
  visit_sigma(cfg.sigma, [&](const auto& s) {
    for (std::size_t k = 0; k < steps; ++k) {
      if (loc.noise == BlockNoise::shared) {
        fill_increments(grid, shared, k, 0, dW);
      } else {
        detail::fill_block_increments(grid, cfg, loc.plan, k, dW);
      }
      if (loc.schedule == PartitionSchedule::growing) {
        detail::fill_block_labels(grid, loc.plan.beta * std::sqrt(static_cast<double>(k + 1) * grid.dt), labels);
      }
      detail::advance_checked(u, dW, next, grid, cfg.boundary, s, k, labels);
      u.swap(next);
      observer(k + 1, static_cast<double>(k + 1) * grid.dt, std::span<const double>(u));
    }
  });
  return Field{std::move(u), static_cast<double>(steps) * grid.dt, grid};
}

struct CoupledLocalizations {
  Field global;
  std::vector<Field> localized;
};

/// Solves u and several localized fields U^(beta_m) on one shared noise
/// realisation. Each localization must use BlockNoise::shared.
inline CoupledLocalizations solve_with_localizations(const RunConfig& cfg, const std::vector<Localization>& locs) {
  cfg.validate();
  const GridSpec& grid = cfg.grid;
  const std::size_t n = grid.n_cells();
  const std::size_t steps = grid.n_steps();
  for (const auto& loc : locs) {
    RunConfig probe = cfg;
    probe.localization = loc;
    probe.validate();
    if (loc.noise != BlockNoise::shared) {
      throw ConfigError("localization.noise", "coupled localizations must read the shared sheet");
    }
  }
  std::vector<double> u(n, 1.0), next(n), dW(n);
  std::vector<std::vector<double>> local(locs.size(), std::vector<double>(n, 1.0));
  std::vector<std::vector<long>> labels;
  for (const auto& loc : locs) labels.push_back(detail::frozen_labels(loc.plan));
  const auto stream = derive_stream(cfg.master_seed, cfg.replicate_id, 0);
  visit_sigma(cfg.sigma, [&](const auto& s) {
    for (std::size_t k = 0; k < steps; ++k) {
      fill_increments(grid, stream, k, 0, dW);
      detail::advance_checked(u, dW, next, grid, cfg.boundary, s, k);
      u.swap(next);
      for (std::size_t m = 0; m < locs.size(); ++m) {
        if (locs[m].schedule == PartitionSchedule::growing) {
          detail::fill_block_labels(grid, locs[m].plan.beta * std::sqrt(static_cast<double>(k + 1) * grid.dt),
                                    labels[m]);
        }
        detail::advance_checked(local[m], dW, next, grid, cfg.boundary, s, k, labels[m]);
        local[m].swap(next);
      }
    }
  });
  const double t = static_cast<double>(steps) * grid.dt;
  CoupledLocalizations out{Field{std::move(u), t, grid}, {}};
  for (auto& v : local) out.localized.push_back(Field{std::move(v), t, grid});
  return out;
}

/// Two solutions from constant data u0_hi >= u0_lo driven by identical noise.
/// `observer(step, t, hi, lo)` runs after every step.
template <class Observer = detail::NoObserver>
std::pair<Field, Field> solve_coupled_pair(const RunConfig& cfg, double u0_hi, double u0_lo,
                                           Observer&& observer = {}) {
  if (!(u0_hi >= u0_lo)) throw std::invalid_argument("solve_coupled_pair: need u0_hi >= u0_lo");
  cfg.validate();
  const GridSpec& grid = cfg.grid;
  const std::size_t n = grid.n_cells();
  const std::size_t steps = grid.n_steps();
  std::vector<double> hi(n, u0_hi), lo(n, u0_lo), next(n), dW(n);
  const auto stream = derive_stream(cfg.master_seed, cfg.replicate_id, 0);
  visit_sigma(cfg.sigma, [&](const auto& s) {
    for (std::size_t k = 0; k < steps; ++k) {
      fill_increments(grid, stream, k, 0, dW);
      detail::advance_checked(hi, dW, next, grid, cfg.boundary, s, k);
      hi.swap(next);
      detail::advance_checked(lo, dW, next, grid, cfg.boundary, s, k);
      lo.swap(next);
      observer(k + 1, static_cast<double>(k + 1) * grid.dt, std::span<const double>(hi),
               std::span<const double>(lo));
    }
  });
  const double t = static_cast<double>(steps) * grid.dt;
  return {Field{std::move(hi), t, grid}, Field{std::move(lo), t, grid}};
}

struct NestedPair {
  Field fine;
  Field coarse;
};

/// Solves on cfg.grid and on the grid with 2 dx and 4 dt (same diffusion
/// number), both driven by one noise realisation: each coarse increment is the
/// sum of the 2 x 4 fine increments of its space-time cell.
inline NestedPair solve_nested_pair(const RunConfig& cfg) {
  cfg.validate();
  const GridSpec& fine = cfg.grid;
  GridSpec coarse = fine;
  coarse.dx = 2.0 * fine.dx;
  coarse.dt = 4.0 * fine.dt;
  coarse.validate();
  const std::size_t n = fine.n_cells();
  const std::size_t steps = fine.n_steps();
  if (n % 2 != 0 || steps % 4 != 0) {
    throw ConfigError("grid.dx", "nested refinement needs an even cell count and a step count divisible by 4");
  }
  std::vector<double> u(n, 1.0), u_next(n), dW(n);
  std::vector<double> v(n / 2, 1.0), v_next(n / 2), dW_coarse(n / 2, 0.0);
  const auto stream = derive_stream(cfg.master_seed, cfg.replicate_id, 0);
  visit_sigma(cfg.sigma, [&](const auto& s) {
    for (std::size_t k = 0; k < steps; ++k) {
      fill_increments(fine, stream, k, 0, dW);
      detail::advance_checked(u, dW, u_next, fine, cfg.boundary, s, k);
      u.swap(u_next);
      for (std::size_t i = 0; i < n / 2; ++i) dW_coarse[i] += dW[2 * i] + dW[2 * i + 1];
      if (k % 4 == 3) {
        detail::advance_checked(v, dW_coarse, v_next, coarse, cfg.boundary, s, k / 4);
        v.swap(v_next);
        std::fill(dW_coarse.begin(), dW_coarse.end(), 0.0);
      }
    }
  });
  const double t = static_cast<double>(steps) * fine.dt;
  return {Field{std::move(u), t, fine}, Field{std::move(v), t, coarse}};
}

/// u*_t(R) = max of the field over grid points in [-R, R].
inline double sup_over_radius(const Field& field, double R) {
  if (!(R >= 0.0)) throw std::invalid_argument("sup_over_radius: R must be >= 0");
  const double tol = 1e-9 * field.grid.dx;
  if (-R < field.grid.x_min - tol || R > field.grid.x_max + tol) {
    throw std::invalid_argument("sup_over_radius: [-R, R] exceeds the domain");
  }
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil((-R - field.grid.x_min) / field.grid.dx - 1e-9)));
  const auto hi = std::min(field.size() - 1, static_cast<std::size_t>(std::floor((R - field.grid.x_min) / field.grid.dx + 1e-9)));
  if (lo > hi) throw std::invalid_argument("sup_over_radius: no grid point in [-R, R]");
  return *std::max_element(field.values.begin() + static_cast<std::ptrdiff_t>(lo),
                           field.values.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
}

/// Grid index closest to x.
inline std::size_t nearest_cell(const GridSpec& grid, double x) {
  const double k = std::round((x - grid.x_min) / grid.dx);
  if (k < 0.0 || k >= static_cast<double>(grid.n_cells())) throw std::out_of_range("nearest_cell: x outside domain");
  return static_cast<std::size_t>(k);
}

}  // namespace sheatlab
