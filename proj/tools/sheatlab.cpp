// sheatlab command-line driver: one subcommand per experiment.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 non-finite solver
// state, 1 any other failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sheatlab/config.hpp"
#include "sheatlab/errors.hpp"
#include "sheatlab/experiments.hpp"
#include "sheatlab/io.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::string> seed;
  std::optional<std::string> workers;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App& cmd, Options& opt) {
  cmd.add_option("--config", opt.config_path, "key = value configuration file");
  cmd.add_option("--seed", opt.seed, "master seed (unsigned 64-bit)");
  cmd.add_option("--workers", opt.workers, "worker threads");
  cmd.add_option("--out", opt.out, "output directory");
  cmd.add_option("--set", opt.overrides, "override a configuration key, key=value (repeatable)");
}

void log_provenance(const sheatlab::ExperimentConfig& cfg) {
  for (const auto& [key, s] : cfg.settings) {
    if (s.source == sheatlab::Source::fallback) continue;
    std::cerr << "sheatlab: " << key << " = " << s.value << " (" << sheatlab::to_string(s.source);
    if (s.source == sheatlab::Source::file) std::cerr << " line " << s.line;
    if (!s.overridden.empty()) std::cerr << ", overrides " << s.overridden;
    std::cerr << ")\n";
  }
}

int run(const sheatlab::Experiment experiment, const Options& opt) {
  sheatlab::ConfigSources src;
  src.experiment = experiment;
  if (!opt.config_path.empty()) src.file = sheatlab::read_config_file(opt.config_path);
  for (const auto& o : opt.overrides) src.flags.push_back(sheatlab::parse_override(o));
  if (opt.seed) src.flags.push_back({"seed", *opt.seed, 0});
  if (opt.workers) src.flags.push_back({"workers", *opt.workers, 0});
  if (opt.out) src.flags.push_back({"out", *opt.out, 0});
  if (const char* env = std::getenv("SHEATLAB_SEED")) src.env_seed = std::string(env);

  const sheatlab::ExperimentConfig cfg = sheatlab::resolve_config(src);
  log_provenance(cfg);
  const auto result = sheatlab::run_experiment(cfg);
  const auto snapshots = sheatlab::collect_snapshots(cfg);
  const auto paths = sheatlab::write_outputs(cfg, result, snapshots);
  std::cout << paths.csv.string() << "\n" << paths.json.string() << "\n";
  for (const auto& p : paths.snapshots) std::cout << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for the one-dimensional stochastic heat equation"};
  app.set_version_flag("--version", std::string(sheatlab::kVersion));
  app.require_subcommand(1);
  Options opt;
  std::optional<sheatlab::Experiment> chosen;
  for (const auto name : sheatlab::kExperimentNames) {
    CLI::App* cmd = app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
    add_common(*cmd, opt);
    cmd->callback([&chosen, name] { chosen = sheatlab::parse_experiment(name); });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return run(*chosen, opt);
  } catch (const sheatlab::ConfigError& e) {
    std::cerr << "sheatlab: " << e.what() << "\n";
    return 2;
  } catch (const sheatlab::NonFinite& e) {
    std::cerr << "sheatlab: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "sheatlab: " << e.what() << "\n";
    return 1;
  }
}
