#pragma once

// Monte Carlo statistics and scaling fits. Every function here is a pure
// function of its inputs; the bootstrap takes its seed explicitly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "sheatlab/errors.hpp"
#include "sheatlab/regression.hpp"
#include "sheatlab/solver.hpp"

namespace sheatlab {

inline constexpr double kZ95 = 1.959963984540054;

// ---------------------------------------------------------------------------
// Sample summaries

/// Power sums sum x^k, k = 1..8. Merging adds the sums, so shards combine in
/// any order up to floating-point rounding.
class PowerSums {
public:
  static constexpr int kMaxOrder = 8;

  void add(double x) noexcept {
    ++n_;
    double p = 1.0;
    for (int k = 0; k < kMaxOrder; ++k) {
      p *= x;
      sums_[k] += p;
    }
  }

  void merge(const PowerSums& other) noexcept {
    n_ += other.n_;
    for (int k = 0; k < kMaxOrder; ++k) sums_[k] += other.sums_[k];
  }

  std::size_t count() const noexcept { return n_; }

  /// Raw moment E x^k, 1 <= k <= 8.
  double raw_moment(int k) const {
    if (k < 1 || k > kMaxOrder) throw std::invalid_argument("PowerSums: order must lie in [1, 8]");
    if (n_ == 0) throw std::invalid_argument("PowerSums: no samples");
    return sums_[k - 1] / static_cast<double>(n_);
  }

  double mean() const { return raw_moment(1); }
  double variance() const { return raw_moment(2) - mean() * mean(); }

private:
  std::size_t n_{0};
  std::array<double, kMaxOrder> sums_{};
};

struct SampleSummary {
  std::size_t n{};
  double mean{};
  double variance{};   ///< unbiased
  double mean_se{};
  double m4{};         ///< fourth central moment
  double skewness{};
  double excess_kurtosis{};
};

inline SampleSummary summarize(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("summarize: need at least two samples");
  SampleSummary s;
  s.n = x.size();
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2 * n / (n - 1.0);
  s.mean_se = std::sqrt(s.variance / n);
  s.m4 = m4;
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  s.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return s;
}

/// Two-sided Student-t critical value.
inline double t_critical(double level, std::size_t dof) {
  boost::math::students_t dist(static_cast<double>(std::max<std::size_t>(dof, 1)));
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

// ---------------------------------------------------------------------------
// Tail probabilities

struct TailEstimate {
  double lambda{};
  double p_hat{};
  double ci_lo{};
  double ci_hi{};
  std::size_t n{};
};

/// 95% Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = kZ95) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
}

inline constexpr std::size_t kMinTailSamples = 1000;

/// P{X >= lambda} for each lambda.
inline std::vector<TailEstimate> estimate_tail(std::span<const double> samples, std::span<const double> lambdas) {
  if (samples.empty()) throw std::invalid_argument("estimate_tail: no samples");
  if (samples.size() < kMinTailSamples) {
    throw std::invalid_argument("estimate_tail: need at least " + std::to_string(kMinTailSamples) + " samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<TailEstimate> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), lambda);
    const auto k = static_cast<std::size_t>(sorted.end() - first);
    const auto [lo, hi] = wilson_interval(k, sorted.size());
    out.push_back({lambda, static_cast<double>(k) / static_cast<double>(sorted.size()), lo, hi, sorted.size()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaling fits

struct ScalingFit {
  double exponent{};
  double intercept{};
  double r2{};
  std::size_t n_points{};
  std::string transform;
  double exponent_se{};

  /// Whether the slope differs from 0 at the given two-sided level, i.e. the
  /// constant model is rejected.
  bool rejects_constant(double level = 0.95) const {
    if (n_points < 3) return false;
    if (exponent_se == 0.0) return exponent != 0.0;
    return std::abs(exponent) / exponent_se > t_critical(level, n_points - 2);
  }
};

inline constexpr std::size_t kMinFitPoints = 4;

inline ScalingFit to_scaling_fit(const LineFit& line, std::string transform) {
  return {line.slope, line.intercept, line.r2, line.n, std::move(transform), line.slope_se};
}

/// Gaussian tails P ~ exp(-c lambda^2) (bounded sigma) or log-normal-type
/// tails P ~ exp(-c (log lambda)^{3/2}) (parabolic Anderson model).
enum class TailMode { bounded, pam };

/// Slope of log(-log p) against log lambda (bounded) or log log lambda (pam),
/// over the estimates with lambda > 1 and p_hat in (0, 0.5).
inline ScalingFit fit_tail_exponent(std::span<const TailEstimate> estimates, TailMode mode = TailMode::bounded) {
  std::vector<double> x, y;
  double lo = INFINITY, hi = 0.0;
  for (const auto& e : estimates) {
    if (!(e.p_hat > 0.0 && e.p_hat < 0.5) || !(e.lambda > 1.0)) continue;
    const double lx = std::log(e.lambda);
    x.push_back(mode == TailMode::bounded ? lx : std::log(lx));
    y.push_back(std::log(-std::log(e.p_hat)));
    lo = std::min(lo, e.lambda);
    hi = std::max(hi, e.lambda);
  }
  if (x.size() < kMinFitPoints) {
    throw InsufficientRange("fit_tail_exponent: need >= 4 estimates with p_hat in (0, 0.5), got " +
                            std::to_string(x.size()));
  }
  if (hi < 2.0 * lo) throw InsufficientRange("fit_tail_exponent: usable lambda span is below a factor 2");
  return to_scaling_fit(fit_line(x, y),
                        mode == TailMode::bounded ? "log(-log p) vs log lambda" : "log(-log p) vs log log lambda");
}

/// Growth law of u*_t(R):
///  bounded: mean sup      vs (log R)^{1/2}
///  general: mean sup      vs (log R)^{1/6}
///  pam:     mean log sup  vs (log R)^{2/3}
enum class SupMode { bounded, general, pam };

inline double sup_growth_exponent(SupMode mode) {
  switch (mode) {
    case SupMode::bounded: return 0.5;
    case SupMode::general: return 1.0 / 6.0;
    case SupMode::pam: return 2.0 / 3.0;
  }
  return 0.5;
}

/// Regresses the per-R replicate mean on (log R)^gamma with inverse-variance
/// weights (equal weights when some per-R standard error vanishes).
inline ScalingFit fit_sup_scaling(std::span<const double> R_values, const std::vector<std::vector<double>>& sup_samples,
                                  SupMode mode) {
  if (R_values.size() != sup_samples.size()) throw std::invalid_argument("fit_sup_scaling: size mismatch");
  if (R_values.size() < kMinFitPoints) throw InsufficientRange("fit_sup_scaling: need >= 4 radii");
  for (std::size_t i = 0; i < R_values.size(); ++i) {
    if (!(R_values[i] > 1.0)) throw std::invalid_argument("fit_sup_scaling: radii must exceed 1");
    if (i > 0 && !(R_values[i] > R_values[i - 1])) throw std::invalid_argument("fit_sup_scaling: radii must increase");
    if (sup_samples[i].empty()) throw std::invalid_argument("fit_sup_scaling: empty sample for a radius");
  }
  if (R_values.back() < 16.0 * R_values.front()) throw InsufficientRange("fit_sup_scaling: R span is below a factor 16");

  const double gamma = sup_growth_exponent(mode);
  std::vector<double> x, y, w;
  bool weighted = true;
  for (std::size_t i = 0; i < R_values.size(); ++i) {
    std::vector<double> v = sup_samples[i];
    if (mode == SupMode::pam) {
      for (double& s : v) {
        if (!(s > 0.0)) throw NonPositive("fit_sup_scaling: pam mode needs positive suprema");
        s = std::log(s);
      }
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double se = 0.0;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double s : v) ss += (s - mean) * (s - mean);
      se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    if (!(se > 0.0)) weighted = false;
    x.push_back(std::pow(std::log(R_values[i]), gamma));
    y.push_back(mean);
    w.push_back(se > 0.0 ? 1.0 / (se * se) : 1.0);
  }
  const char* transform = mode == SupMode::bounded ? "mean sup vs (log R)^(1/2)"
                          : mode == SupMode::general ? "mean sup vs (log R)^(1/6)"
                                                     : "mean log sup vs (log R)^(2/3)";
  return to_scaling_fit(weighted ? fit_line(x, y, w) : fit_line(x, y), transform);
}

/// Log-log slope of RMS(u - U^(beta)) against beta.
inline ScalingFit estimate_coupling_decay(std::span<const double> beta_values, std::span<const double> rms_diffs) {
  if (beta_values.size() != rms_diffs.size()) throw std::invalid_argument("estimate_coupling_decay: size mismatch");
  if (beta_values.size() < kMinFitPoints) throw InsufficientRange("estimate_coupling_decay: need >= 4 beta values");
  const auto [lo, hi] = std::minmax_element(beta_values.begin(), beta_values.end());
  if (!(*lo > 0.0)) throw std::invalid_argument("estimate_coupling_decay: beta must be > 0");
  if (*hi < 8.0 * *lo) throw InsufficientRange("estimate_coupling_decay: beta span is below a factor 8");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < beta_values.size(); ++i) {
    if (!(rms_diffs[i] > 0.0)) throw NonPositive("estimate_coupling_decay: RMS differences must be > 0");
    x.push_back(std::log(beta_values[i]));
    y.push_back(std::log(rms_diffs[i]));
  }
  return to_scaling_fit(fit_line(x, y), "log rms vs log beta");
}

// ---------------------------------------------------------------------------
// Independence

/// Maximum absolute off-diagonal sample correlation of the columns of a
/// replicate x block matrix (rows are replicates).
inline double independence_test(const std::vector<std::vector<double>>& block_samples) {
  const std::size_t n = block_samples.size();
  if (n < 1000) throw std::invalid_argument("independence_test: need >= 1000 replicates");
  const std::size_t m = block_samples.front().size();
  if (m < 2) throw std::invalid_argument("independence_test: need >= 2 blocks");
  std::vector<double> mean(m, 0.0), sd(m, 0.0);
  for (const auto& row : block_samples) {
    if (row.size() != m) throw std::invalid_argument("independence_test: ragged matrix");
    for (std::size_t j = 0; j < m; ++j) mean[j] += row[j];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  for (const auto& row : block_samples) {
    for (std::size_t j = 0; j < m; ++j) sd[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    sd[j] = std::sqrt(sd[j]);
    if (!(sd[j] > 0.0)) throw std::invalid_argument("independence_test: column " + std::to_string(j) + " is constant");
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      double c = 0.0;
      for (const auto& row : block_samples) c += (row[a] - mean[a]) * (row[b] - mean[b]);
      worst = std::max(worst, std::abs(c / (sd[a] * sd[b])));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Time growth

struct LyapunovFit {
  double slope{};
  double slope_se{};
  double intercept{};
  std::size_t n_points{};
};

/// Least-squares slope of log(statistic) against t.
inline LyapunovFit estimate_lyapunov(std::span<const std::pair<double, double>> trajectory) {
  if (trajectory.size() < 5) throw std::invalid_argument("estimate_lyapunov: need >= 5 time points");
  std::vector<double> t, y;
  for (const auto& [time, stat] : trajectory) {
    if (!(stat > 0.0)) throw NonPositive("estimate_lyapunov: statistic " + std::to_string(stat) + " at t = " +
                                         std::to_string(time) + " is not positive");
    t.push_back(time);
    y.push_back(std::log(stat));
  }
  const auto line = fit_line(t, y);
  return {line.slope, line.slope_se, line.intercept, line.n};
}

/// Grid weights of the C^infinity bump psi(x) ~ exp(-1 / (1 - (2 (x - centre) / width)^2))
/// supported on |x - centre| < width / 2, normalised so that sum psi_i dx = 1.
inline std::vector<double> bump_weights(const GridSpec& grid, double centre, double width = 1.0) {
  std::vector<double> w(grid.n_cells(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double z = 2.0 * (grid.x(i) - centre) / width;
    if (std::abs(z) < 1.0) {
      w[i] = std::exp(-1.0 / (1.0 - z * z));
      total += w[i] * grid.dx;
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("bump_weights: bump not resolved by the grid");
  for (double& v : w) v /= total;
  return w;
}

/// int u_t(x) psi(x) dx for the bump of `bump_weights`.
inline double mollified_statistic(std::span<const double> values, const GridSpec& grid, double centre,
                                  double width = 1.0) {
  const auto w = bump_weights(grid, centre, width);
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += w[i] * values[i] * grid.dx;
  return acc;
}

inline double mollified_statistic(const Field& field, double centre, double width = 1.0) {
  return mollified_statistic(field.values, field.grid, centre, width);
}

// ---------------------------------------------------------------------------
// Moments

struct MomentEstimate {
  int order{};
  double value{};
  double ci_lo{};
  double ci_hi{};
};

struct MomentReport {
  std::vector<MomentEstimate> moments;
  double alpha{};
  double exp_log_functional{};  ///< sample mean of exp(alpha (log_+ |x|)^{3/2}), log_+ u = log(u v e)
  std::size_t n{};
};

struct BootstrapOptions {
  std::size_t resamples{200};
  std::uint64_t seed{0};
  double level{0.95};
};

struct Interval {
  double estimate{};
  double lo{};
  double hi{};
};

/// Percentile-bootstrap interval of stat(indices) over n resampled units.
/// stat receives index lists into the caller's data; the point estimate uses
/// the identity resample.
template <class Stat>
Interval bootstrap_interval(std::size_t n, Stat&& stat, const BootstrapOptions& boot) {
  if (n == 0) throw std::invalid_argument("bootstrap_interval: no units");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Interval out;
  out.estimate = stat(std::span<const std::size_t>(idx));
  out.lo = out.hi = out.estimate;
  if (boot.resamples == 0) return out;
  std::mt19937_64 rng(boot.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> reps;
  reps.reserve(boot.resamples);
  for (std::size_t b = 0; b < boot.resamples; ++b) {
    for (auto& i : idx) i = pick(rng);
    reps.push_back(stat(std::span<const std::size_t>(idx)));
  }
  std::sort(reps.begin(), reps.end());
  const double tail = (1.0 - boot.level) / 2.0;
  const auto lo = static_cast<std::size_t>(std::floor(tail * static_cast<double>(reps.size() - 1)));
  const auto hi = static_cast<std::size_t>(std::ceil((1.0 - tail) * static_cast<double>(reps.size() - 1)));
  out.lo = std::min(out.estimate, reps[lo]);
  out.hi = std::max(out.estimate, reps[hi]);
  return out;
}

/// Mean of `values` with a percentile-bootstrap interval.
inline Interval bootstrap_mean(std::span<const double> values, const BootstrapOptions& boot) {
  return bootstrap_interval(
      values.size(),
      [&](std::span<const std::size_t> idx) {
        double acc = 0.0;
        for (std::size_t i : idx) acc += values[i];
        return acc / static_cast<double>(idx.size());
      },
      boot);
}

inline constexpr int kMaxMomentOrder = 8;

/// Raw moments E x^k with percentile-bootstrap intervals.
inline MomentReport estimate_moments(std::span<const double> samples, std::span<const int> orders, double alpha = 0.5,
                                     BootstrapOptions boot = {}) {
  if (samples.empty()) throw std::invalid_argument("estimate_moments: no samples");
  for (int k : orders) {
    if (k < 1 || k > kMaxMomentOrder) throw std::invalid_argument("estimate_moments: orders must lie in [1, 8]");
  }
  const std::size_t n = samples.size();
  MomentReport report;
  report.n = n;
  report.alpha = alpha;
  double el = 0.0;
  for (double x : samples) el += std::exp(alpha * std::pow(std::log(std::max(std::abs(x), std::numbers::e)), 1.5));
  report.exp_log_functional = el / static_cast<double>(n);

  // One seed for every order, so all orders see the same resamples.
  for (int k : orders) {
    const auto ci = bootstrap_interval(
        n,
        [&](std::span<const std::size_t> idx) {
          double acc = 0.0;
          for (std::size_t i : idx) acc += std::pow(samples[i], k);
          return acc / static_cast<double>(idx.size());
        },
        boot);
    report.moments.push_back({k, ci.estimate, ci.lo, ci.hi});
  }
  return report;
}

}  // namespace sheatlab
