#pragma once

// Deterministic ground truth for second moments.
//
// With sigma(u) = sqrt(a) u (or the lower chain of a constant sigma), the
// second moment f(t) = E u_t(x)^2 solves the Abel-kernel renewal equation
//
//   f(t) = 1 + a int_0^t f(s) nu(t, ds),   nu(t, ds) = ds / sqrt(4 pi kappa (t - s)),
//
// whose Neumann series is 1 + sum_l a^{l+1} I_l(t) with I_l the (l+1)-fold
// iterated nu-integral.
//
// f is smooth in tau = sqrt(t) but not in t, so integrals are taken in tau:
//   int_0^t g(s) (t - s)^{-1/2} ds = int_0^tau g(sigma^2) 2 sigma / sqrt(tau^2 - sigma^2) dsigma,
// with g piecewise linear on a uniform tau grid and the kernel integrated
// exactly on each cell (product integration), followed by extrapolation in h.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sheatlab/errors.hpp"
#include "sheatlab/heat_kernel.hpp"

namespace sheatlab {

struct RenewalParams {
  double kappa{1.0};
  double coeff{1.0};  ///< a: eps0^2 for the constant-sigma chain, c^2 for the PAM second moment
  double t_end{1.0};
  std::size_t n_steps{500};

  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("renewal: kappa must be > 0");
    if (!(coeff >= 0.0)) throw std::invalid_argument("renewal: coeff must be >= 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("renewal: t_end must be >= 0");
    if (n_steps < 100) throw std::invalid_argument("renewal: n_steps must be >= 100");
  }
};

struct RenewalCurve {
  std::vector<double> t;
  std::vector<double> f;

  double final_value() const { return f.back(); }
};

/// Product-integration weights of the Abel kernel 2 sigma / sqrt(tau_i^2 - sigma^2)
/// on the uniform grid tau_j = j h, j = 0..n, for piecewise-linear integrands.
/// Row i holds the weights of nodes 0..i (lower-triangular, packed).
/// Exact integrals of the Abel kernel 2 sigma / sqrt(tau^2 - sigma^2) against
/// the two hat functions of the cell [a, b], for tau >= b. Adds them to the
/// weights of the nodes at a and b.
inline void add_cell_weights(double tau, double a, double b, double h, double& wa, double& wb) {
  const double ra = std::sqrt(std::max(0.0, (tau - a) * (tau + a)));
  const double rb = std::sqrt(std::max(0.0, (tau - b) * (tau + b)));
  // m0 = int_a^b 2s/sqrt(tau^2-s^2) ds, m1 = int_a^b 2s^2/sqrt(tau^2-s^2) ds
  const double m0 = 2.0 * (b - a) * (b + a) / (ra + rb);
  const double m1 = tau * tau * (std::asin(std::min(1.0, b / tau)) - std::asin(a / tau)) - b * rb + a * ra;
  wa += (b * m0 - m1) / h;
  wb += (m1 - a * m0) / h;
}

/// Solves g_i = 1 + q sum_{j<=i} W_ij g_j node by node on n cells of [0, tau_end].
/// Weights are generated row by row, so memory stays O(n).
inline std::vector<double> solve_abel_renewal(double q, double tau_end, std::size_t n) {
  const double h = tau_end / static_cast<double>(n);
  std::vector<double> g(n + 1, 1.0), row(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill_n(row.begin(), i + 1, 0.0);
    const double tau = static_cast<double>(i) * h;
    for (std::size_t j = 0; j < i; ++j) {
      add_cell_weights(tau, static_cast<double>(j) * h, static_cast<double>(j + 1) * h, h, row[j], row[j + 1]);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += row[j] * g[j];
    g[i] = (1.0 + q * acc) / (1.0 - q * row[i]);
  }
  return g;
}

namespace detail {

inline constexpr double kRefinementTolerance = 1e-6;
inline constexpr int kMaxDoublings = 4;

inline std::vector<double> downsample(const std::vector<double>& v, std::size_t n_out) {
  const std::size_t stride = (v.size() - 1) / n_out;
  std::vector<double> out(n_out + 1);
  for (std::size_t i = 0; i <= n_out; ++i) out[i] = v[stride * i];
  return out;
}

/// Eliminates the h^p term from estimates at h and h/2.
inline std::vector<double> extrapolate(const std::vector<double>& coarse, const std::vector<double>& fine, double p) {
  const double f = std::pow(2.0, p);
  std::vector<double> out(coarse.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) out[i] = (f * fine[i] - coarse[i]) / (f - 1.0);
  return out;
}

inline double relative_change(double a, double b) { return std::abs(b - a) / std::max(1.0, std::abs(b)); }

/// `level(n)` runs the product-trapezoidal scheme on n cells. Its error
/// expands in h^2, h^{5/2}, h^3, ..., so two extrapolation steps over three
/// grids remove the leading pair. The resolution doubles from n0 until the
/// second step moves the last node by at most kRefinementTolerance; the
/// result is sampled at n_out + 1 equispaced nodes.
template <class Level>
std::vector<double> refine(Level&& level, std::size_t n0, std::size_t n_out, const char* what) {
  std::vector<std::vector<double>> levels;
  double change = 0.0;
  std::size_t n = n0;
  for (int d = 0; d <= kMaxDoublings + 2; ++d, n *= 2) {
    levels.push_back(downsample(level(n), n_out));
    if (levels.size() < 3) continue;
    const std::size_t k = levels.size();
    const auto r_lo = extrapolate(levels[k - 3], levels[k - 2], 2.0);
    const auto r_hi = extrapolate(levels[k - 2], levels[k - 1], 2.0);
    auto estimate = extrapolate(r_lo, r_hi, 2.5);
    change = relative_change(r_hi.back(), estimate.back());
    if (change <= kRefinementTolerance) return estimate;
  }
  throw NonConvergence(std::string(what) + ": refinement changed the result by " + std::to_string(change) +
                       " (relative) at the finest grid; increase n_steps");
}

}  // namespace detail

/// Second-moment curve f on t_i = (i sqrt(t_end) / n)^2, i = 0..n.
inline RenewalCurve renewal_second_moment_curve(const RenewalParams& params) {
  params.validate();
  const std::size_t n = params.n_steps;
  const double tau_end = std::sqrt(params.t_end);
  RenewalCurve curve;
  for (std::size_t i = 0; i <= n; ++i) {
    const double tau = tau_end * static_cast<double>(i) / static_cast<double>(n);
    curve.t.push_back(tau * tau);
  }
  if (params.t_end == 0.0 || params.coeff == 0.0) {
    curve.f.assign(n + 1, 1.0);
    return curve;
  }
  const double q = params.coeff / std::sqrt(4.0 * std::numbers::pi * params.kappa);
  curve.f = detail::refine([&](std::size_t m) { return solve_abel_renewal(q, tau_end, m); }, n, n,
                           "renewal_second_moment");
  return curve;
}

inline double renewal_second_moment(const RenewalParams& params) {
  return renewal_second_moment_curve(params).final_value();
}

/// I_l(t) = int_0^t nu(t, ds_1) int_0^{s_1} nu(s_1, ds_2) ... int_0^{s_l} nu(s_l, ds_{l+1}),
/// evaluated by applying the nu-operator l + 1 times to the constant 1.
inline double iterated_abel_integral(int l, double kappa, double t, std::size_t n_steps = 250) {
  if (l < 0 || l > 12) throw std::invalid_argument("iterated_abel_integral: l must lie in [0, 12]");
  if (!(kappa > 0.0)) throw std::invalid_argument("iterated_abel_integral: kappa must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("iterated_abel_integral: t must be >= 0");
  if (t == 0.0) return 0.0;
  const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * kappa);
  // All l + 1 applications advance together row by row: level k + 1 at node i
  // only needs level k at nodes 0..i.
  auto run = [&](std::size_t n) {
    const double h = std::sqrt(t) / static_cast<double>(n);
    std::vector<std::vector<double>> g(static_cast<std::size_t>(l) + 2, std::vector<double>(n + 1, 0.0));
    std::fill(g[0].begin(), g[0].end(), 1.0);
    std::vector<double> row(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
      std::fill_n(row.begin(), i + 1, 0.0);
      const double tau = static_cast<double>(i) * h;
      for (std::size_t j = 0; j < i; ++j) {
        add_cell_weights(tau, static_cast<double>(j) * h, static_cast<double>(j + 1) * h, h, row[j], row[j + 1]);
      }
      for (std::size_t k = 1; k < g.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += row[j] * g[k - 1][j];
        g[k][i] = norm * acc;
      }
    }
    return std::vector<double>{g.back().front(), g.back().back()};
  };
  return detail::refine(run, n_steps, 1, "iterated_abel_integral").back();
}

/// E (1 + zeta)^{2k} with zeta ~ N(0, eps0^2 sqrt(t / (pi kappa))): the exact
/// 2k-th moment of u_t(x) when sigma is the constant eps0.
inline double constant_sigma_moments(double eps0, double kappa, double t, int k) {
  if (k < 1) throw std::invalid_argument("constant_sigma_moments: k must be >= 1");
  const double v = eps0 * eps0 * kernel_l2_time_integral({kappa, t});
  // sum_j C(2k, 2j) E zeta^{2j}
  double total = 1.0;
  double binom = 1.0;  // C(2k, 2j)
  for (int j = 1; j <= k; ++j) {
    binom *= static_cast<double>((2 * k - 2 * j + 2) * (2 * k - 2 * j + 1)) / static_cast<double>((2 * j - 1) * (2 * j));
    total += binom * gaussian_even_moment(v, j);
  }
  return total;
}

}  // namespace sheatlab
