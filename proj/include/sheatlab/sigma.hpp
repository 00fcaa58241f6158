#pragma once

// Catalogue of nonlinearities sigma driving du = (kappa/2) u_xx + sigma(u) W'.
//
//   Constant      sigma(x) = eps0
//   BoundedBelow  sigma(x) = eps0 + b |x| / (1 + |x|)          in [eps0, eps0 + b]
//   LogDecay      sigma(x) = eps0 (log(e + |x|))^{-(1/6 - gamma)}
//   Linear        sigma(x) = c x                                (parabolic Anderson model)

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sheatlab/errors.hpp"

namespace sheatlab {

enum class SigmaKind { Constant, BoundedBelow, LogDecay, Linear };

inline std::string_view to_string(SigmaKind kind) {
  switch (kind) {
    case SigmaKind::Constant: return "constant";
    case SigmaKind::BoundedBelow: return "bounded";
    case SigmaKind::LogDecay: return "logdecay";
    case SigmaKind::Linear: return "linear";
  }
  return "?";
}

inline SigmaKind parse_sigma_kind(std::string_view name) {
  if (name == "constant") return SigmaKind::Constant;
  if (name == "bounded" || name == "boundedbelow") return SigmaKind::BoundedBelow;
  if (name == "logdecay") return SigmaKind::LogDecay;
  if (name == "linear" || name == "pam") return SigmaKind::Linear;
  throw ConfigError("sigma.kind", "unknown kind '" + std::string(name) +
                                      "' (expected constant|bounded|logdecay|linear)");
}

struct SigmaSpec {
  SigmaKind kind{SigmaKind::Constant};
  double eps0{1.0};
  double c{1.0};
  double gamma{0.1};
  double b{1.0};

  static SigmaSpec constant(double eps0) { return {SigmaKind::Constant, eps0, 0.0, 0.0, 0.0}; }
  static SigmaSpec bounded(double eps0, double b) { return {SigmaKind::BoundedBelow, eps0, 0.0, 0.0, b}; }
  static SigmaSpec log_decay(double eps0, double gamma) { return {SigmaKind::LogDecay, eps0, 0.0, gamma, 0.0}; }
  static SigmaSpec linear(double c) { return {SigmaKind::Linear, 0.0, c, 0.0, 0.0}; }

  /// Exponent 1/6 - gamma of the LogDecay family.
  double log_decay_power() const { return 1.0 / 6.0 - gamma; }

  void validate() const {
    switch (kind) {
      case SigmaKind::Constant:
        if (!(eps0 >= 0.0)) throw ConfigError("sigma.eps0", "must be >= 0");
        break;
      case SigmaKind::BoundedBelow:
        if (!(eps0 > 0.0)) throw ConfigError("sigma.eps0", "must be > 0 for bounded sigma");
        if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("sigma.b", "must be finite and >= 0");
        break;
      case SigmaKind::LogDecay:
        if (!(eps0 > 0.0)) throw ConfigError("sigma.eps0", "must be > 0 for logdecay sigma");
        if (!(gamma > 0.0 && gamma < 1.0 / 6.0)) throw ConfigError("sigma.gamma", "must lie in (0, 1/6)");
        break;
      case SigmaKind::Linear:
        if (!(c > 0.0)) throw ConfigError("sigma.c", "must be > 0");
        break;
    }
  }
};

// Concrete functors let the solver's inner loop inline sigma.
struct ConstantSigma {
  double eps0;
  double operator()(double) const noexcept { return eps0; }
};

struct BoundedSigma {
  double eps0;
  double b;
  double operator()(double x) const noexcept {
    const double a = std::abs(x);
    return eps0 + b * a / (1.0 + a);
  }
};

struct LogDecaySigma {
  double eps0;
  double power;
  double operator()(double x) const noexcept {
    return eps0 * std::pow(std::log(std::numbers::e + std::abs(x)), -power);
  }
};

struct LinearSigma {
  double c;
  double operator()(double x) const noexcept { return c * x; }
};

/// Calls f with the functor matching spec.kind.
template <class F>
decltype(auto) visit_sigma(const SigmaSpec& spec, F&& f) {
  switch (spec.kind) {
    case SigmaKind::Constant: return f(ConstantSigma{spec.eps0});
    case SigmaKind::BoundedBelow: return f(BoundedSigma{spec.eps0, spec.b});
    case SigmaKind::LogDecay: return f(LogDecaySigma{spec.eps0, spec.log_decay_power()});
    case SigmaKind::Linear: return f(LinearSigma{spec.c});
  }
  throw std::logic_error("visit_sigma: bad kind");
}

inline double evaluate(const SigmaSpec& spec, double u) {
  return visit_sigma(spec, [u](const auto& s) { return s(u); });
}

/// Exact for Constant and Linear. BoundedBelow and LogDecay return the
/// supremum of |sigma'|, attained at 0 because |sigma'| decreases in |x|:
///   BoundedBelow: b / (1 + |x|)^2 <= b
///   LogDecay:     eps0 (1/6 - gamma) / ((e + |x|) log(e + |x|)^{1 + 1/6 - gamma}) <= eps0 (1/6 - gamma) / e
inline double lipschitz_constant(const SigmaSpec& spec) {
  switch (spec.kind) {
    case SigmaKind::Constant: return 0.0;
    case SigmaKind::BoundedBelow: return spec.b;
    case SigmaKind::LogDecay: return spec.eps0 * spec.log_decay_power() / std::numbers::e;
    case SigmaKind::Linear: return spec.c;
  }
  return 0.0;
}

/// sigma(0) == 0, the case where positivity and the comparison principle apply.
inline bool vanishes_at_zero(const SigmaSpec& spec) { return spec.kind == SigmaKind::Linear; }

}  // namespace sheatlab
