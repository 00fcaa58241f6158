#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace sheatlab {

struct LineFit {
  double slope{};
  double intercept{};
  double r2{};
  double slope_se{};  ///< residual-based standard error of the slope
  std::size_t n{};
};

/// (Weighted) least-squares line y = intercept + slope x. Empty weights mean
/// equal weights.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w = {}) {
  const std::size_t n = x.size();
  if (y.size() != n || (!w.empty() && w.size() != n)) throw std::invalid_argument("fit_line: size mismatch");
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  auto weight = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += weight(i);
    sx += weight(i) * x[i];
    sy += weight(i) * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += weight(i) * dx * dx;
    sxy += weight(i) * dx * dy;
    syy += weight(i) * dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");

  LineFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += weight(i) * r * r;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  fit.slope_se = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace sheatlab
