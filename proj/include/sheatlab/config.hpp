#pragma once

// Experiment configuration: `key = value` files, command-line overrides and
// the seed environment variable, resolved into one typed ExperimentConfig.
//
// File syntax: one `key = value` per line; `#` starts a comment; blank lines
// are ignored; list values are comma separated. Unknown keys are errors.
// Precedence: flag > file > environment (seed only) > experiment default.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sheatlab/errors.hpp"
#include "sheatlab/estimator.hpp"
#include "sheatlab/grid.hpp"
#include "sheatlab/sigma.hpp"
#include "sheatlab/solver.hpp"

namespace sheatlab {

enum class Experiment { tails, supscaling, moments, coupling, comparison, lyapunov, oracle };

inline constexpr std::string_view kExperimentNames[] = {"tails",      "supscaling", "moments", "coupling",
                                                        "comparison", "lyapunov",   "oracle"};

inline std::string_view to_string(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

inline Experiment parse_experiment(std::string_view name, std::size_t line = 0) {
  for (std::size_t i = 0; i < std::size(kExperimentNames); ++i) {
    if (kExperimentNames[i] == name) return static_cast<Experiment>(i);
  }
  throw ConfigError("experiment", "unknown experiment '" + std::string(name) + "'", line);
}

enum class Source { fallback, env, file, flag };

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::fallback: return "default";
    case Source::env: return "env";
    case Source::file: return "file";
    case Source::flag: return "flag";
  }
  return "?";
}

struct Setting {
  std::string value;
  Source source{Source::fallback};
  std::size_t line{0};          ///< file line, when source == file
  std::string overridden;       ///< description of the value this one replaced, if any
};

enum class CouplingMode { decay, independence };
enum class MomentSample { point, field };
enum class LyapunovStatistic { pointwise, mollified, mean };

struct ExperimentConfig {
  Experiment experiment{Experiment::tails};
  GridSpec grid;
  SigmaSpec sigma;
  std::size_t replicates{1000};
  std::uint64_t seed{0};
  std::size_t workers{1};
  std::string out_dir{"."};
  double x0{0.0};

  std::vector<double> lambdas;
  TailMode tail_mode{TailMode::bounded};
  bool tail_abs{true};

  std::vector<double> radii;
  SupMode sup_mode{SupMode::bounded};

  CouplingMode coupling_mode{CouplingMode::decay};
  std::vector<double> betas;
  double independence_beta{2.0};
  PartitionSchedule schedule{PartitionSchedule::growing};
  BlockNoise block_noise{BlockNoise::shared};

  double u0_hi{1.0};
  double u0_lo{0.5};
  double slack{1e-9};

  LyapunovStatistic lyapunov_statistic{LyapunovStatistic::pointwise};
  std::size_t lyapunov_samples{40};

  std::vector<int> orders;
  double alpha{0.5};
  MomentSample moment_sample{MomentSample::point};
  bool refine{false};
  std::size_t bootstrap_resamples{200};

  double oracle_coeff{2.0};
  std::size_t oracle_n_steps{500};

  std::vector<double> snapshot_times;
  std::uint32_t snapshot_replicate{0};

  /// Every key with its resolved value and where it came from.
  std::map<std::string, Setting> settings;

  /// FNV-1a over the resolved settings, excluding keys that cannot change results.
  std::uint64_t hash() const;
};

namespace config_detail {

struct KeyInfo {
  const char* name;
  const char* fallback;
};

// Keys and their defaults before experiment-specific overrides.
inline const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> table{
      {"experiment", ""},
      {"grid.kappa", "1"},
      {"grid.dt", "0.001"},
      {"grid.dx", "0.05"},
      {"grid.x_min", "-8"},
      {"grid.x_max", "8"},
      {"grid.t_end", "1"},
      {"sigma.kind", "bounded"},
      {"sigma.eps0", "1"},
      {"sigma.b", "1"},
      {"sigma.c", "1"},
      {"sigma.gamma", "0.05"},
      {"replicates", "1000"},
      {"seed", "0"},
      {"workers", "1"},
      {"out", "."},
      {"x0", "0"},
      {"tails.lambdas", "1,2,3,4,5"},
      {"tails.mode", "bounded"},
      {"tails.abs", "true"},
      {"supscaling.radii", "1.6,6.4,25.6,102.4,409.6"},
      {"supscaling.mode", "bounded"},
      {"coupling.mode", "decay"},
      {"coupling.betas", "4,8,16,32,64"},
      {"coupling.beta", "2"},
      {"coupling.schedule", "auto"},
      {"coupling.noise", "auto"},
      {"comparison.u0_hi", "1"},
      {"comparison.u0_lo", "0.5"},
      {"comparison.slack", "1e-9"},
      {"lyapunov.statistic", "pointwise"},
      {"lyapunov.samples", "40"},
      {"moments.orders", "1,2,3,4"},
      {"moments.alpha", "0.5"},
      {"moments.sample", "point"},
      {"moments.refine", "false"},
      {"bootstrap.resamples", "200"},
      {"oracle.coeff", "2"},
      {"oracle.n_steps", "500"},
      {"snapshot.times", ""},
      {"snapshot.replicate", "0"},
  };
  return table;
}

inline std::vector<std::pair<std::string, std::string>> experiment_defaults(Experiment e) {
  switch (e) {
    case Experiment::tails:
      return {{"replicates", "10000"}, {"grid.dx", "0.1"}, {"grid.dt", "0.004"}};
    case Experiment::supscaling:
      return {{"replicates", "100"}, {"grid.dx", "0.1"}, {"grid.x_min", "-409.6"}, {"grid.x_max", "409.6"}};
    case Experiment::moments:
      return {{"replicates", "10000"}, {"sigma.kind", "constant"}};
    case Experiment::coupling:
      return {{"replicates", "20"}, {"grid.dt", "0.0005"}, {"grid.x_min", "-64"}, {"grid.x_max", "64"}};
    case Experiment::comparison:
      return {{"replicates", "100"}, {"sigma.kind", "linear"}, {"grid.dt", "0.0005"}};
    case Experiment::lyapunov:
      return {{"replicates", "100"}, {"sigma.kind", "linear"}, {"grid.dt", "0.0005"}, {"grid.t_end", "20"}};
    case Experiment::oracle:
      return {};
  }
  return {};
}

inline bool known_key(std::string_view key) {
  const auto& table = keys();
  return std::any_of(table.begin(), table.end(), [&](const KeyInfo& k) { return key == k.name; });
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const Setting& s, const std::string& key) {
  const std::string v = trim(s.value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + s.value + "'", s.line);
  }
  return out;
}

inline std::uint64_t parse_u64(const Setting& s, const std::string& key) {
  const std::string v = trim(s.value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + s.value + "'", s.line);
  }
  return out;
}

inline bool parse_bool(const Setting& s, const std::string& key) {
  const std::string v = trim(s.value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + s.value + "'", s.line);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_doubles(const Setting& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(s.value)) out.push_back(parse_double({item, s.source, s.line, {}}, key));
  return out;
}

template <class Enum, std::size_t N>
Enum parse_choice(const Setting& s, const std::string& key, const std::pair<const char*, Enum> (&choices)[N]) {
  const std::string v = trim(s.value);
  std::string names;
  for (const auto& [name, value] : choices) {
    if (v == name) return value;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(key, "expected one of " + names + ", got '" + s.value + "'", s.line);
}

}  // namespace config_detail

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line{0};
};

/// Parses `key = value` text. Syntax errors and unknown keys raise ConfigError
/// with the offending line number.
inline std::vector<ConfigEntry> parse_config_text(std::string_view text) {
  std::vector<ConfigEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = config_detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(body, "expected 'key = value'", line_no);
    ConfigEntry entry{config_detail::trim(body.substr(0, eq)), config_detail::trim(body.substr(eq + 1)), line_no};
    if (entry.key.empty()) throw ConfigError("", "missing key before '='", line_no);
    if (!config_detail::known_key(entry.key)) throw ConfigError(entry.key, "unknown key", line_no);
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::vector<ConfigEntry> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Splits a `key=value` override.
inline ConfigEntry parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError(text, "override must look like key=value");
  ConfigEntry entry{config_detail::trim(text.substr(0, eq)), config_detail::trim(text.substr(eq + 1)), 0};
  if (!config_detail::known_key(entry.key)) throw ConfigError(entry.key, "unknown key");
  return entry;
}

struct ConfigSources {
  std::optional<Experiment> experiment;   ///< from the subcommand
  std::vector<ConfigEntry> file;           ///< parsed config file
  std::vector<ConfigEntry> flags;          ///< command-line overrides, in order
  std::optional<std::string> env_seed;     ///< SHEATLAB_SEED
};

/// Merges the sources and converts every value; the result is validated.
inline ExperimentConfig resolve_config(const ConfigSources& src) {
  using namespace config_detail;
  std::map<std::string, Setting> settings;
  for (const auto& k : keys()) settings[k.name] = Setting{k.fallback, Source::fallback, 0, {}};

  auto describe = [](const Setting& s) {
    std::string d = std::string(to_string(s.source));
    if (s.source == Source::file) d += ":" + std::to_string(s.line);
    return d + " '" + s.value + "'";
  };
  auto assign = [&](const std::string& key, const std::string& value, Source source, std::size_t line) {
    Setting& s = settings.at(key);
    std::string previous = s.source == Source::fallback ? std::string{} : describe(s);
    s = Setting{value, source, line, std::move(previous)};
  };

  // The experiment decides which defaults apply, so it is resolved first.
  std::optional<Experiment> experiment = src.experiment;
  for (const auto& e : src.file) {
    if (e.key != "experiment") continue;
    const Experiment from_file = parse_experiment(e.value, e.line);
    if (experiment && *experiment != from_file) {
      throw ConfigError("experiment", "file names '" + e.value + "' but the subcommand is '" +
                                          std::string(to_string(*experiment)) + "'", e.line);
    }
    experiment = from_file;
  }
  if (!experiment) throw ConfigError("experiment", "no experiment given");
  settings["experiment"] = Setting{std::string(to_string(*experiment)), src.experiment ? Source::flag : Source::file, 0, {}};
  for (const auto& [key, value] : experiment_defaults(*experiment)) settings[key].value = value;

  if (src.env_seed) assign("seed", *src.env_seed, Source::env, 0);
  for (const auto& e : src.file) {
    if (e.key != "experiment") assign(e.key, e.value, Source::file, e.line);
  }
  for (const auto& e : src.flags) {
    if (e.key == "experiment") throw ConfigError("experiment", "select the experiment with the subcommand");
    assign(e.key, e.value, Source::flag, 0);
  }

  auto get = [&](const char* key) -> const Setting& { return settings.at(key); };
  auto num = [&](const char* key) { return parse_double(get(key), key); };
  auto count = [&](const char* key) { return static_cast<std::size_t>(parse_u64(get(key), key)); };

  ExperimentConfig cfg;
  cfg.experiment = *experiment;
  cfg.grid = GridSpec{num("grid.kappa"), num("grid.dt"), num("grid.dx"), num("grid.x_min"), num("grid.x_max"),
                      num("grid.t_end")};
  cfg.sigma.kind = [&] {
    const Setting& s = get("sigma.kind");
    try {
      return parse_sigma_kind(trim(s.value));
    } catch (const ConfigError& e) {
      throw ConfigError("sigma.kind", e.detail(), s.line);
    }
  }();
  cfg.sigma.eps0 = num("sigma.eps0");
  cfg.sigma.b = num("sigma.b");
  cfg.sigma.c = num("sigma.c");
  cfg.sigma.gamma = num("sigma.gamma");
  if (cfg.sigma.kind == SigmaKind::Constant) cfg.sigma.b = cfg.sigma.c = cfg.sigma.gamma = 0.0;
  if (cfg.sigma.kind == SigmaKind::BoundedBelow) cfg.sigma.c = cfg.sigma.gamma = 0.0;
  if (cfg.sigma.kind == SigmaKind::LogDecay) cfg.sigma.b = cfg.sigma.c = 0.0;
  if (cfg.sigma.kind == SigmaKind::Linear) cfg.sigma.eps0 = cfg.sigma.b = cfg.sigma.gamma = 0.0;

  cfg.replicates = count("replicates");
  cfg.seed = parse_u64(get("seed"), "seed");
  cfg.workers = count("workers");
  cfg.out_dir = trim(get("out").value);
  cfg.x0 = num("x0");

  cfg.lambdas = parse_doubles(get("tails.lambdas"), "tails.lambdas");
  cfg.tail_mode = parse_choice(get("tails.mode"), "tails.mode",
                               {std::pair{"bounded", TailMode::bounded}, std::pair{"pam", TailMode::pam}});
  cfg.tail_abs = parse_bool(get("tails.abs"), "tails.abs");

  cfg.radii = parse_doubles(get("supscaling.radii"), "supscaling.radii");
  cfg.sup_mode = parse_choice(get("supscaling.mode"), "supscaling.mode",
                              {std::pair{"bounded", SupMode::bounded}, std::pair{"general", SupMode::general},
                               std::pair{"pam", SupMode::pam}});

  cfg.coupling_mode = parse_choice(get("coupling.mode"), "coupling.mode",
                                   {std::pair{"decay", CouplingMode::decay},
                                    std::pair{"independence", CouplingMode::independence}});
  cfg.betas = parse_doubles(get("coupling.betas"), "coupling.betas");
  cfg.independence_beta = num("coupling.beta");
  const bool decay = cfg.coupling_mode == CouplingMode::decay;
  cfg.schedule = parse_choice(get("coupling.schedule"), "coupling.schedule",
                              {std::pair{"auto", decay ? PartitionSchedule::growing : PartitionSchedule::frozen},
                               std::pair{"frozen", PartitionSchedule::frozen},
                               std::pair{"growing", PartitionSchedule::growing}});
  cfg.block_noise = parse_choice(get("coupling.noise"), "coupling.noise",
                                 {std::pair{"auto", decay ? BlockNoise::shared : BlockNoise::per_block},
                                  std::pair{"per_block", BlockNoise::per_block},
                                  std::pair{"shared", BlockNoise::shared}});

  cfg.u0_hi = num("comparison.u0_hi");
  cfg.u0_lo = num("comparison.u0_lo");
  cfg.slack = num("comparison.slack");

  cfg.lyapunov_statistic = parse_choice(get("lyapunov.statistic"), "lyapunov.statistic",
                                        {std::pair{"pointwise", LyapunovStatistic::pointwise},
                                         std::pair{"mollified", LyapunovStatistic::mollified},
                                         std::pair{"mean", LyapunovStatistic::mean}});
  cfg.lyapunov_samples = count("lyapunov.samples");

  for (double k : parse_doubles(get("moments.orders"), "moments.orders")) {
    if (k != std::floor(k) || k < 1 || k > kMaxMomentOrder) {
      throw ConfigError("moments.orders", "orders must be integers in [1, 8]", get("moments.orders").line);
    }
    cfg.orders.push_back(static_cast<int>(k));
  }
  cfg.alpha = num("moments.alpha");
  cfg.moment_sample = parse_choice(get("moments.sample"), "moments.sample",
                                   {std::pair{"point", MomentSample::point}, std::pair{"field", MomentSample::field}});
  cfg.refine = parse_bool(get("moments.refine"), "moments.refine");
  cfg.bootstrap_resamples = count("bootstrap.resamples");

  cfg.oracle_coeff = num("oracle.coeff");
  cfg.oracle_n_steps = count("oracle.n_steps");

  cfg.snapshot_times = parse_doubles(get("snapshot.times"), "snapshot.times");
  cfg.snapshot_replicate = static_cast<std::uint32_t>(parse_u64(get("snapshot.replicate"), "snapshot.replicate"));
  cfg.settings = std::move(settings);

  // Validation, each failure naming its key and line.
  auto fail = [&](const char* key, const std::string& what) {
    throw ConfigError(key, what, cfg.settings.at(key).line);
  };
  try {
    cfg.grid.validate();
  } catch (const ConfigError& e) {
    const auto it = cfg.settings.find(e.key());
    throw ConfigError(e.key(), e.detail(), it == cfg.settings.end() ? 0 : it->second.line);
  }
  try {
    cfg.sigma.validate();
  } catch (const ConfigError& e) {
    const auto it = cfg.settings.find(e.key());
    throw ConfigError(e.key(), e.detail(), it == cfg.settings.end() ? 0 : it->second.line);
  }
  if (cfg.replicates < 1) fail("replicates", "must be >= 1");
  if (cfg.replicates > std::numeric_limits<std::uint32_t>::max()) fail("replicates", "too many replicates");
  if (cfg.x0 < cfg.grid.x_min || cfg.x0 >= cfg.grid.x_max) fail("x0", "must lie inside the domain");
  switch (cfg.experiment) {
    case Experiment::tails:
      if (cfg.lambdas.empty()) fail("tails.lambdas", "list is empty");
      break;
    case Experiment::supscaling:
      if (cfg.radii.empty()) fail("supscaling.radii", "list is empty");
      for (double r : cfg.radii) {
        if (!(r >= 0.0) || -r < cfg.grid.x_min - 1e-9 || r > cfg.grid.x_max + 1e-9) {
          fail("supscaling.radii", "every [-R, R] must lie inside [grid.x_min, grid.x_max]");
        }
      }
      break;
    case Experiment::coupling:
      if (decay && cfg.betas.empty()) fail("coupling.betas", "list is empty");
      if (cfg.schedule == PartitionSchedule::growing && cfg.block_noise == BlockNoise::per_block) {
        fail("coupling.noise", "a growing partition needs shared noise");
      }
      if (decay && cfg.block_noise != BlockNoise::shared) fail("coupling.noise", "decay mode needs shared noise");
      if (!(cfg.grid.t_end > 0.0)) fail("grid.t_end", "coupling needs t_end > 0");
      break;
    case Experiment::comparison:
      if (!(cfg.u0_hi >= cfg.u0_lo)) fail("comparison.u0_lo", "must not exceed comparison.u0_hi");
      if (!(cfg.slack >= 0.0)) fail("comparison.slack", "must be >= 0");
      break;
    case Experiment::lyapunov:
      if (cfg.lyapunov_samples < 5) fail("lyapunov.samples", "need at least 5 time points");
      if (cfg.lyapunov_samples > cfg.grid.n_steps()) fail("lyapunov.samples", "more samples than time steps");
      break;
    case Experiment::moments:
      if (cfg.orders.empty()) fail("moments.orders", "list is empty");
      break;
    case Experiment::oracle:
      if (!(cfg.oracle_coeff >= 0.0)) fail("oracle.coeff", "must be >= 0");
      if (cfg.oracle_n_steps < 100) fail("oracle.n_steps", "must be >= 100");
      break;
  }
  for (double t : cfg.snapshot_times) {
    if (!(t > 0.0) || t > cfg.grid.t_end + 1e-12) fail("snapshot.times", "times must lie in (0, grid.t_end]");
  }
  return cfg;
}

inline std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [key, s] : settings) {
    if (key == "workers" || key == "out") continue;
    feed(key);
    feed("=");
    feed(s.value);
    feed("\n");
  }
  return h;
}

}  // namespace sheatlab
