#pragma once

// Picard iteration for f = 1 + a nu f carried out exactly on power series in
// sqrt(t). The Abel operator maps t^alpha to
//   (4 pi kappa)^{-1/2} Gamma(alpha + 1) Gamma(1/2) / Gamma(alpha + 3/2) t^{alpha + 1/2},
// so each iterate is a finite series with known coefficients and no
// quadrature is involved.

#include <cmath>
#include <numbers>
#include <vector>

namespace test_support {

/// Coefficients c_m of f_K(t) = sum_m c_m t^{m/2} after K Picard steps from f_0 = 1.
inline std::vector<double> picard_coefficients(double a, double kappa, int iterations) {
  std::vector<double> c{1.0};
  const double norm = a / std::sqrt(4.0 * std::numbers::pi * kappa);
  for (int k = 0; k < iterations; ++k) {
    std::vector<double> next(c.size() + 1, 0.0);
    next[0] = 1.0;
    for (std::size_t m = 0; m < c.size(); ++m) {
      const double alpha = 0.5 * static_cast<double>(m);
      next[m + 1] = norm * c[m] * std::exp(std::lgamma(alpha + 1.0) + std::lgamma(0.5) - std::lgamma(alpha + 1.5));
    }
    c.swap(next);
  }
  return c;
}

inline double evaluate_series(const std::vector<double>& c, double t) {
  double total = 0.0;
  for (std::size_t m = c.size(); m-- > 0;) total = total * std::sqrt(t) + c[m];
  return total;
}

inline double picard_second_moment(double a, double kappa, double t, int iterations = 200) {
  return evaluate_series(picard_coefficients(a, kappa, iterations), t);
}

}  // namespace test_support
