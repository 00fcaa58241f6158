#pragma once

// The seven canonical experiments. Each runs its replicates through
// run_replicates, which stores per-replicate results by index; all
// reductions then walk that array in index order, so results do not depend
// on the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sheatlab/config.hpp"
#include "sheatlab/estimator.hpp"
#include "sheatlab/oracle.hpp"
#include "sheatlab/parallel.hpp"
#include "sheatlab/philox.hpp"
#include "sheatlab/solver.hpp"

namespace sheatlab {

struct ResultRow {
  std::string quantity;
  double param{};
  double estimate{};
  double ci_lo{};
  double ci_hi{};
  std::size_t n{};
};

struct ExperimentResult {
  Experiment experiment{};
  std::vector<ResultRow> rows;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> notes;
  RenewalCurve curve;  ///< oracle experiment only

  void set(std::string name, double value) { metrics.emplace_back(std::move(name), value); }
  void note(std::string name, std::string text) { notes.emplace_back(std::move(name), std::move(text)); }

  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return v;
    }
    throw std::out_of_range("no metric '" + name + "'");
  }
  bool has_metric(const std::string& name) const {
    return std::any_of(metrics.begin(), metrics.end(), [&](const auto& m) { return m.first == name; });
  }
};

namespace experiment_detail {

inline RunConfig base_run(const ExperimentConfig& cfg) {
  RunConfig rc;
  rc.grid = cfg.grid;
  rc.sigma = cfg.sigma;
  rc.master_seed = cfg.seed;
  return rc;
}

inline BootstrapOptions bootstrap(const ExperimentConfig& cfg, std::uint64_t salt) {
  return {cfg.bootstrap_resamples, mix64(cfg.seed ^ salt), 0.95};
}

inline std::uint32_t rep_id(std::size_t r) { return static_cast<std::uint32_t>(r); }

/// Mean with a two-sided 95% t-interval.
inline ResultRow mean_row(std::string quantity, double param, std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double half = 0.0;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    half = t_critical(0.95, v.size() - 1) * std::sqrt(ss / (n - 1.0) / n);
  }
  return {std::move(quantity), param, mean, mean - half, mean + half, v.size()};
}

/// E (1 + zeta)^k for zeta ~ N(0, v).
inline double shifted_gaussian_moment(double v, int k) {
  double total = 1.0;
  double binom = 1.0;  // C(k, 2j)
  for (int j = 1; 2 * j <= k; ++j) {
    binom *= static_cast<double>((k - 2 * j + 2) * (k - 2 * j + 1)) / static_cast<double>((2 * j - 1) * (2 * j));
    total += binom * gaussian_even_moment(v, j);
  }
  return total;
}

inline void add_fit(ExperimentResult& res, const std::string& prefix, const ScalingFit& fit) {
  res.set(prefix + "_exponent", fit.exponent);
  res.set(prefix + "_exponent_se", fit.exponent_se);
  res.set(prefix + "_intercept", fit.intercept);
  res.set(prefix + "_r2", fit.r2);
  res.set(prefix + "_n_points", static_cast<double>(fit.n_points));
  res.set(prefix + "_rejects_constant", fit.rejects_constant(0.95) ? 1.0 : 0.0);
  res.note(prefix + "_transform", fit.transform);
}

inline ExperimentResult run_tails(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  const RunConfig base = base_run(cfg);
  const std::size_t cell = nearest_cell(cfg.grid, cfg.x0);
  const auto samples = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    const double v = solve(rc).values[cell];
    return cfg.tail_abs ? std::abs(v) : v;
  });
  for (const auto& e : estimate_tail(samples, cfg.lambdas)) {
    res.rows.push_back({"p_hat", e.lambda, e.p_hat, e.ci_lo, e.ci_hi, e.n});
  }
  const auto summary = summarize(samples);
  res.set("sample_mean", summary.mean);
  res.set("sample_sd", std::sqrt(summary.variance));
  try {
    std::vector<TailEstimate> est = estimate_tail(samples, cfg.lambdas);
    add_fit(res, "tail", fit_tail_exponent(est, cfg.tail_mode));
  } catch (const std::invalid_argument& e) {
    res.note("tail_fit", e.what());
  }
  return res;
}

inline ExperimentResult run_supscaling(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  const RunConfig base = base_run(cfg);
  const auto per_rep = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    const Field f = solve(rc);
    std::vector<double> sups;
    for (double R : cfg.radii) sups.push_back(sup_over_radius(f, R));
    return sups;
  });
  std::vector<std::vector<double>> by_radius(cfg.radii.size());
  for (const auto& sups : per_rep) {
    for (std::size_t i = 0; i < sups.size(); ++i) by_radius[i].push_back(sups[i]);
  }
  const bool pam = cfg.sup_mode == SupMode::pam;
  double previous = -std::numeric_limits<double>::infinity();
  bool increasing = true;
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    std::vector<double> v = by_radius[i];
    if (pam) {
      for (double& s : v) s = s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity();
    }
    const ResultRow row = mean_row(pam ? "mean_log_sup" : "mean_sup", cfg.radii[i], v);
    increasing &= row.estimate > previous;
    previous = row.estimate;
    res.rows.push_back(row);
  }
  res.set("strictly_increasing", increasing ? 1.0 : 0.0);
  try {
    add_fit(res, "sup", fit_sup_scaling(cfg.radii, by_radius, cfg.sup_mode));
  } catch (const std::invalid_argument& e) {
    res.note("sup_fit", e.what());
  }
  return res;
}

struct MomentSamples {
  std::vector<double> point;                ///< u_t(x0) per replicate (point mode)
  std::vector<std::vector<double>> field;   ///< per order: spatial mean of u^k per replicate (field mode)
};

inline void add_moment_rows(ExperimentResult& res, const ExperimentConfig& cfg, const MomentSamples& s,
                            const std::string& tag) {
  const auto boot = bootstrap(cfg, 0xB007u);
  const std::string pre = tag.empty() ? "" : tag + "_";
  if (cfg.moment_sample == MomentSample::point) {
    const auto report = estimate_moments(s.point, cfg.orders, cfg.alpha, boot);
    for (const auto& m : report.moments) {
      res.rows.push_back({pre + "raw_moment", static_cast<double>(m.order), m.value, m.ci_lo, m.ci_hi, report.n});
      res.set(pre + "raw_moment_" + std::to_string(m.order), m.value);
      res.set(pre + "raw_moment_" + std::to_string(m.order) + "_ci_lo", m.ci_lo);
      res.set(pre + "raw_moment_" + std::to_string(m.order) + "_ci_hi", m.ci_hi);
    }
    res.set(pre + "exp_log_functional", report.exp_log_functional);
    const std::span<const double> x(s.point);
    auto central = [&](int k) {
      return [&, k](std::span<const std::size_t> idx) {
        double mean = 0.0;
        for (std::size_t i : idx) mean += x[i];
        mean /= static_cast<double>(idx.size());
        double acc = 0.0;
        for (std::size_t i : idx) acc += std::pow(x[i] - mean, k);
        return acc / static_cast<double>(idx.size() - (k == 2 ? 1 : 0));
      };
    };
    const auto var = bootstrap_interval(x.size(), central(2), boot);
    const auto c4 = bootstrap_interval(x.size(), central(4), boot);
    res.rows.push_back({pre + "variance", 2.0, var.estimate, var.lo, var.hi, x.size()});
    res.rows.push_back({pre + "central_moment", 4.0, c4.estimate, c4.lo, c4.hi, x.size()});
    res.set(pre + "variance", var.estimate);
    res.set(pre + "variance_ci_lo", var.lo);
    res.set(pre + "variance_ci_hi", var.hi);
    res.set(pre + "central_moment_4", c4.estimate);
    const auto summary = summarize(x);
    const double n = static_cast<double>(x.size());
    const double skew_se = std::sqrt(6.0 / n), kurt_se = std::sqrt(24.0 / n);
    res.rows.push_back({pre + "skewness", 3.0, summary.skewness, summary.skewness - kZ95 * skew_se,
                        summary.skewness + kZ95 * skew_se, x.size()});
    res.rows.push_back({pre + "excess_kurtosis", 4.0, summary.excess_kurtosis,
                        summary.excess_kurtosis - kZ95 * kurt_se, summary.excess_kurtosis + kZ95 * kurt_se, x.size()});
    res.set(pre + "skewness", summary.skewness);
    res.set(pre + "skewness_se", skew_se);
    res.set(pre + "excess_kurtosis", summary.excess_kurtosis);
    res.set(pre + "excess_kurtosis_se", kurt_se);
  } else {
    for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
      const int k = cfg.orders[o];
      const auto ci = bootstrap_mean(s.field[o], boot);
      res.rows.push_back({pre + "raw_moment", static_cast<double>(k), ci.estimate, ci.lo, ci.hi, s.field[o].size()});
      res.set(pre + "raw_moment_" + std::to_string(k), ci.estimate);
      res.set(pre + "raw_moment_" + std::to_string(k) + "_ci_lo", ci.lo);
      res.set(pre + "raw_moment_" + std::to_string(k) + "_ci_hi", ci.hi);
    }
  }
}

inline void collect_moments(MomentSamples& s, const ExperimentConfig& cfg, const Field& f, std::size_t cell) {
  if (cfg.moment_sample == MomentSample::point) {
    s.point.push_back(f.values[cell]);
    return;
  }
  s.field.resize(cfg.orders.size());
  for (std::size_t o = 0; o < cfg.orders.size(); ++o) {
    double acc = 0.0;
    for (double v : f.values) acc += std::pow(v, cfg.orders[o]);
    s.field[o].push_back(acc / static_cast<double>(f.size()));
  }
}

inline ExperimentResult run_moments(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  const RunConfig base = base_run(cfg);
  const std::size_t cell = nearest_cell(cfg.grid, cfg.x0);
  GridSpec coarse_grid = cfg.grid;
  coarse_grid.dx *= 2.0;
  coarse_grid.dt *= 4.0;
  const std::size_t coarse_cell = cfg.refine ? nearest_cell(coarse_grid, cfg.x0) : 0;

  const auto per_rep = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    std::pair<MomentSamples, MomentSamples> out;
    if (cfg.refine) {
      const auto pair = solve_nested_pair(rc);
      collect_moments(out.first, cfg, pair.fine, cell);
      collect_moments(out.second, cfg, pair.coarse, coarse_cell);
    } else {
      collect_moments(out.first, cfg, solve(rc), cell);
    }
    return out;
  });
  MomentSamples fine, coarse;
  for (const auto& [f, c] : per_rep) {
    fine.point.insert(fine.point.end(), f.point.begin(), f.point.end());
    coarse.point.insert(coarse.point.end(), c.point.begin(), c.point.end());
    fine.field.resize(f.field.size());
    coarse.field.resize(c.field.size());
    for (std::size_t o = 0; o < f.field.size(); ++o) fine.field[o].insert(fine.field[o].end(), f.field[o].begin(), f.field[o].end());
    for (std::size_t o = 0; o < c.field.size(); ++o) coarse.field[o].insert(coarse.field[o].end(), c.field[o].begin(), c.field[o].end());
  }
  add_moment_rows(res, cfg, fine, "");
  if (cfg.refine) add_moment_rows(res, cfg, coarse, "coarse");

  // Exact values where the oracle module has them.
  const double t = static_cast<double>(cfg.grid.n_steps()) * cfg.grid.dt;
  const double kappa = cfg.grid.kappa;
  for (int k : cfg.orders) {
    double exact = std::numeric_limits<double>::quiet_NaN();
    if (cfg.sigma.kind == SigmaKind::Constant) {
      exact = shifted_gaussian_moment(cfg.sigma.eps0 * cfg.sigma.eps0 * kernel_l2_time_integral({kappa, t}), k);
    } else if (k == 1) {
      exact = 1.0;
    } else if (k == 2 && cfg.sigma.kind == SigmaKind::Linear) {
      exact = renewal_second_moment({kappa, cfg.sigma.c * cfg.sigma.c, t});
    }
    if (std::isnan(exact)) continue;
    const std::string ks = std::to_string(k);
    res.rows.push_back({"oracle_raw_moment", static_cast<double>(k), exact, exact, exact, 0});
    res.set("oracle_raw_moment_" + ks, exact);
    res.set("rel_error_" + ks, res.metric("raw_moment_" + ks) / exact - 1.0);
    if (cfg.refine) res.set("coarse_rel_error_" + ks, res.metric("coarse_raw_moment_" + ks) / exact - 1.0);
  }
  if (cfg.sigma.kind == SigmaKind::Constant) {
    const double v = cfg.sigma.eps0 * cfg.sigma.eps0 * kernel_l2_time_integral({kappa, t});
    res.set("oracle_variance", v);
    res.set("oracle_central_moment_4", 3.0 * v * v);
  }
  // Shape of k -> (1/k) log m_k over the even orders present.
  std::vector<std::pair<int, double>> even;
  for (int k : cfg.orders) {
    const double m = res.metric("raw_moment_" + std::to_string(k));
    if (k % 2 == 0 && m > 0.0) even.emplace_back(k, std::log(m) / k);
  }
  if (even.size() >= 2) {
    bool increasing = true;
    for (std::size_t i = 1; i < even.size(); ++i) increasing &= even[i].second > even[i - 1].second;
    res.set("normalised_log_moments_increasing", increasing ? 1.0 : 0.0);
  }
  return res;
}

inline ExperimentResult run_coupling_decay(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  const RunConfig base = base_run(cfg);
  const double t = cfg.grid.t_end;
  std::vector<Localization> locs;
  std::vector<std::vector<std::size_t>> midpoint_cells;
  for (double beta : cfg.betas) {
    Localization loc{make_block_plan(beta, t, cfg.grid), cfg.schedule, cfg.block_noise};
    std::vector<std::size_t> cells;
    for (std::size_t b : loc.plan.full_blocks(cfg.grid)) {
      if (loc.plan.has_interior_midpoint(b, cfg.grid)) cells.push_back(loc.plan.midpoint_cell(b, cfg.grid));
    }
    if (cells.empty()) {
      throw ConfigError("coupling.betas", "beta = " + std::to_string(beta) + " leaves no full block inside the domain",
                        cfg.settings.at("coupling.betas").line);
    }
    midpoint_cells.push_back(std::move(cells));
    locs.push_back(std::move(loc));
  }
  // Per replicate and beta: sum of squared differences at the midpoints.
  const auto per_rep = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    const auto out = solve_with_localizations(rc, locs);
    std::vector<double> ss(locs.size(), 0.0);
    for (std::size_t m = 0; m < locs.size(); ++m) {
      for (std::size_t c : midpoint_cells[m]) {
        const double d = out.global.values[c] - out.localized[m].values[c];
        ss[m] += d * d;
      }
    }
    return ss;
  });
  std::vector<double> rms;
  const auto boot = bootstrap(cfg, 0xC0u);
  for (std::size_t m = 0; m < locs.size(); ++m) {
    const double per_rep_count = static_cast<double>(midpoint_cells[m].size());
    const auto ci = bootstrap_interval(
        per_rep.size(),
        [&](std::span<const std::size_t> idx) {
          double acc = 0.0;
          for (std::size_t i : idx) acc += per_rep[i][m];
          return std::sqrt(acc / (per_rep_count * static_cast<double>(idx.size())));
        },
        boot);
    res.rows.push_back({"rms_diff", cfg.betas[m], ci.estimate, ci.lo, ci.hi,
                        per_rep.size() * midpoint_cells[m].size()});
    rms.push_back(ci.estimate);
  }
  try {
    add_fit(res, "coupling", estimate_coupling_decay(cfg.betas, rms));
  } catch (const std::invalid_argument& e) {
    res.note("coupling_fit", e.what());
  }
  return res;
}

inline ExperimentResult run_independence(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  RunConfig base = base_run(cfg);
  const double t = cfg.grid.t_end;
  base.localization = Localization{make_block_plan(cfg.independence_beta, t, cfg.grid), cfg.schedule, cfg.block_noise};
  const BlockPlan& plan = base.localization->plan;
  std::vector<std::size_t> cells;
  for (std::size_t b : plan.full_blocks(cfg.grid)) {
    if (plan.has_interior_midpoint(b, cfg.grid)) cells.push_back(plan.midpoint_cell(b, cfg.grid));
  }
  const auto rows = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    const Field f = solve_localized(rc);
    std::vector<double> v;
    for (std::size_t c : cells) v.push_back(f.values[c]);
    return v;
  });
  const double n = static_cast<double>(rows.size());
  const double threshold = 3.0 / std::sqrt(n);
  const double worst = independence_test(rows);
  res.rows.push_back({"max_abs_corr", cfg.independence_beta, worst, 0.0, threshold, rows.size()});
  res.set("max_abs_corr", worst);
  res.set("threshold", threshold);
  res.set("n_blocks", static_cast<double>(cells.size()));
  res.set("independent", worst < threshold ? 1.0 : 0.0);
  return res;
}

inline ExperimentResult run_comparison(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  const RunConfig base = base_run(cfg);
  struct Stats {
    double violations{0.0};
    double worst_gap{0.0};  ///< largest lo - hi seen
    double min_lo{std::numeric_limits<double>::infinity()};
  };
  const auto per_rep = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    Stats s;
    s.worst_gap = -std::numeric_limits<double>::infinity();
    solve_coupled_pair(rc, cfg.u0_hi, cfg.u0_lo,
                       [&](std::size_t, double, std::span<const double> hi, std::span<const double> lo) {
                         for (std::size_t i = 0; i < hi.size(); ++i) {
                           const double gap = lo[i] - hi[i];
                           if (gap > cfg.slack) s.violations += 1.0;
                           s.worst_gap = std::max(s.worst_gap, gap);
                           s.min_lo = std::min(s.min_lo, lo[i]);
                         }
                       });
    return s;
  });
  Stats total;
  total.worst_gap = -std::numeric_limits<double>::infinity();
  std::vector<double> min_lo;
  for (const auto& s : per_rep) {
    total.violations += s.violations;
    total.worst_gap = std::max(total.worst_gap, s.worst_gap);
    total.min_lo = std::min(total.min_lo, s.min_lo);
    min_lo.push_back(s.min_lo);
  }
  const std::size_t n = per_rep.size();
  res.rows.push_back({"ordering_violations", cfg.u0_lo, total.violations, total.violations, total.violations, n});
  res.rows.push_back({"max_lo_minus_hi", cfg.u0_lo, total.worst_gap, total.worst_gap, total.worst_gap, n});
  res.rows.push_back({"min_lo", cfg.u0_lo, total.min_lo, total.min_lo, total.min_lo, n});
  res.set("ordering_violations", total.violations);
  res.set("max_lo_minus_hi", total.worst_gap);
  res.set("min_lo", total.min_lo);
  res.set("positive", total.min_lo > 0.0 ? 1.0 : 0.0);
  return res;
}

inline ExperimentResult run_lyapunov(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  const RunConfig base = base_run(cfg);
  const std::size_t steps = cfg.grid.n_steps();
  const std::size_t every = steps / cfg.lyapunov_samples;
  const std::size_t cell = nearest_cell(cfg.grid, cfg.x0);
  const auto psi = bump_weights(cfg.grid, cfg.x0, 1.0);
  std::vector<double> times;
  for (std::size_t k = every; k <= steps; k += every) times.push_back(static_cast<double>(k) * cfg.grid.dt);
  const std::size_t m = times.size();

  // Per replicate: pointwise and mollified statistics at the record times.
  const auto per_rep = run_replicates(cfg.replicates, cfg.workers, [&](std::size_t r) {
    RunConfig rc = base;
    rc.replicate_id = rep_id(r);
    std::pair<std::vector<double>, std::vector<double>> out;
    solve(rc, [&](std::size_t k, double, std::span<const double> u) {
      if (k % every != 0 || out.first.size() == m) return;
      out.first.push_back(u[cell]);
      double acc = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) acc += psi[i] * u[i] * cfg.grid.dx;
      out.second.push_back(acc);
    });
    return out;
  });

  // Replicate-mean trajectory of the pointwise value.
  std::vector<std::vector<double>> by_time(m);
  for (const auto& [point, moll] : per_rep) {
    for (std::size_t j = 0; j < m; ++j) by_time[j].push_back(point[j]);
  }
  for (std::size_t j = 0; j < m; ++j) res.rows.push_back(mean_row("mean_u", times[j], by_time[j]));

  const auto boot = bootstrap(cfg, 0x1A9u);
  try {
    const auto ci = bootstrap_interval(
        per_rep.size(),
        [&](std::span<const std::size_t> idx) {
          std::vector<std::pair<double, double>> traj;
          for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t i : idx) acc += per_rep[i].first[j];
            traj.emplace_back(times[j], acc / static_cast<double>(idx.size()));
          }
          return estimate_lyapunov(traj).slope;
        },
        boot);
    res.rows.push_back({"mean_slope", times.back(), ci.estimate, ci.lo, ci.hi, per_rep.size()});
    res.set("mean_slope", ci.estimate);
    res.set("mean_slope_ci_lo", ci.lo);
    res.set("mean_slope_ci_hi", ci.hi);
  } catch (const NonPositive& e) {
    res.note("mean_slope", e.what());
  }
  if (cfg.lyapunov_statistic == LyapunovStatistic::mean) return res;

  // Per-replicate slopes of log statistic against t, summarised by a t-interval.
  auto slopes = [&](bool mollified, const char* name) {
    std::vector<double> s, final_rate;
    for (const auto& [point, moll] : per_rep) {
      const auto& v = mollified ? moll : point;
      std::vector<std::pair<double, double>> traj;
      for (std::size_t j = 0; j < m; ++j) traj.emplace_back(times[j], v[j]);
      s.push_back(estimate_lyapunov(traj).slope);
      final_rate.push_back(std::log(v.back()) / times.back());
    }
    const ResultRow row = mean_row(std::string(name) + "_slope", times.back(), s);
    res.rows.push_back(row);
    res.set(std::string(name) + "_slope", row.estimate);
    res.set(std::string(name) + "_slope_ci_lo", row.ci_lo);
    res.set(std::string(name) + "_slope_ci_hi", row.ci_hi);
    const ResultRow rate = mean_row(std::string(name) + "_rate_at_t_end", times.back(), final_rate);
    res.rows.push_back(rate);
    res.set(std::string(name) + "_rate_at_t_end", rate.estimate);
  };
  try {
    slopes(false, "pointwise");
  } catch (const NonPositive& e) {
    if (cfg.lyapunov_statistic == LyapunovStatistic::pointwise) throw;
    res.note("pointwise_slope", e.what());
  }
  try {
    slopes(true, "mollified");
  } catch (const NonPositive& e) {
    if (cfg.lyapunov_statistic == LyapunovStatistic::mollified) throw;
    res.note("mollified_slope", e.what());
  }
  if (cfg.sigma.kind == SigmaKind::Linear) {
    const double c = cfg.sigma.c, kappa = cfg.grid.kappa;
    res.set("reference_minus_c2_over_24kappa", -c * c / (24.0 * kappa));
    res.set("reference_minus_c4_over_24kappa", -c * c * c * c / (24.0 * kappa));
  }
  return res;
}

inline ExperimentResult run_oracle(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = cfg.experiment;
  res.curve = renewal_second_moment_curve({cfg.grid.kappa, cfg.oracle_coeff, cfg.grid.t_end, cfg.oracle_n_steps});
  const double lambda = cfg.oracle_coeff / (2.0 * std::sqrt(cfg.grid.kappa));
  const double z = lambda * std::sqrt(cfg.grid.t_end);
  res.set("f_final", res.curve.final_value());
  res.set("lambda", lambda);
  res.set("closed_form_final", std::exp(z * z) * (1.0 + std::erf(z)));
  return res;
}

}  // namespace experiment_detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  using namespace experiment_detail;
  switch (cfg.experiment) {
    case Experiment::tails: return run_tails(cfg);
    case Experiment::supscaling: return run_supscaling(cfg);
    case Experiment::moments: return run_moments(cfg);
    case Experiment::coupling:
      return cfg.coupling_mode == CouplingMode::decay ? run_coupling_decay(cfg) : run_independence(cfg);
    case Experiment::comparison: return run_comparison(cfg);
    case Experiment::lyapunov: return run_lyapunov(cfg);
    case Experiment::oracle: return run_oracle(cfg);
  }
  throw std::logic_error("run_experiment: bad experiment");
}

/// Fields of replicate cfg.snapshot_replicate at the requested times.
inline std::vector<Field> collect_snapshots(const ExperimentConfig& cfg) {
  std::vector<Field> out;
  if (cfg.snapshot_times.empty() || cfg.experiment == Experiment::oracle) return out;
  std::vector<std::size_t> wanted;
  for (double t : cfg.snapshot_times) wanted.push_back(static_cast<std::size_t>(std::llround(t / cfg.grid.dt)));
  RunConfig rc = experiment_detail::base_run(cfg);
  rc.replicate_id = cfg.snapshot_replicate;
  solve(rc, [&](std::size_t k, double t, std::span<const double> u) {
    for (std::size_t w : wanted) {
      if (w == k) out.push_back(Field{std::vector<double>(u.begin(), u.end()), t, cfg.grid});
    }
  });
  return out;
}

}  // namespace sheatlab
