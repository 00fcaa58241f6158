#pragma once

// Output files: CSV results, JSON fit summary, oracle curve and field
// snapshots. Every file is written under a temporary name and renamed on
// success. Header lines start with '#'; the timestamp sits on its own
// "# generated:" line so that bodies and the other header lines are
// reproducible byte for byte.

#include <chrono>
#include <cmath>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sheatlab/config.hpp"
#include "sheatlab/errors.hpp"
#include "sheatlab/experiments.hpp"

#ifndef SHEATLAB_VERSION
#define SHEATLAB_VERSION "0.1.0"
#endif

namespace sheatlab {

inline constexpr const char* kVersion = SHEATLAB_VERSION;

namespace io_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace io_detail

/// Reproducible header: version, experiment, seed, hash and every setting.
inline std::string output_header(const ExperimentConfig& cfg) {
  using io_detail::hex;
  std::string h;
  h += "# sheatlab " + std::string(kVersion) + "\n";
  h += "# experiment: " + std::string(to_string(cfg.experiment)) + "\n";
  h += "# master_seed: " + std::to_string(cfg.seed) + "\n";
  h += "# config_hash: " + hex(cfg.hash()) + "\n";
  for (const auto& [key, s] : cfg.settings) {
    h += "# " + key + " = " + s.value + " (" + std::string(to_string(s.source));
    if (s.source == Source::file) h += " line " + std::to_string(s.line);
    h += ")\n";
  }
  return h;
}

inline std::string generated_line() { return "# generated: " + io_detail::utc_now() + "\n"; }

/// Result rows; one line per row, no header comments.
inline std::string csv_body(const ExperimentConfig& cfg, const ExperimentResult& res) {
  using io_detail::num;
  const std::string exp(to_string(cfg.experiment));
  const std::string seed = std::to_string(cfg.seed);
  const std::string hash = io_detail::hex(cfg.hash());
  std::string body = "experiment,quantity,param,estimate,ci_lo,ci_hi,n,seed,config_hash\n";
  for (const auto& r : res.rows) {
    body += exp + "," + r.quantity + "," + num(r.param) + "," + num(r.estimate) + "," + num(r.ci_lo) + "," +
            num(r.ci_hi) + "," + std::to_string(r.n) + "," + seed + "," + hash + "\n";
  }
  return body;
}

inline std::string curve_body(const RenewalCurve& curve) {
  std::string body = "t,f\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    body += io_detail::num(curve.t[i]) + "," + io_detail::num(curve.f[i]) + "\n";
  }
  return body;
}

inline std::string field_body(const Field& f) {
  std::string body = "x,u\n";
  for (std::size_t i = 0; i < f.size(); ++i) body += io_detail::num(f.x(i)) + "," + io_detail::num(f.values[i]) + "\n";
  return body;
}

inline nlohmann::ordered_json json_summary(const ExperimentConfig& cfg, const ExperimentResult& res) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["master_seed"] = cfg.seed;
  j["config_hash"] = io_detail::hex(cfg.hash());
  auto& metrics = j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : res.metrics) {
    if (std::isfinite(v)) {
      metrics[k] = v;
    } else {
      metrics[k] = io_detail::num(v);
    }
  }
  auto& notes = j["notes"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : res.notes) notes[k] = v;
  auto& config = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, s] : cfg.settings) config[k] = {{"value", s.value}, {"source", std::string(to_string(s.source))}};
  return j;
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::vector<std::filesystem::path> snapshots;
};

/// Writes <out>/<experiment>.csv, <experiment>.json and any snapshots.
inline OutputPaths write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                                 const std::vector<Field>& snapshots = {}) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string stem(to_string(cfg.experiment));
  const std::string header = output_header(cfg);
  const std::string stamp = generated_line();
  OutputPaths paths{dir / (stem + ".csv"), dir / (stem + ".json"), {}};
  const std::string body = cfg.experiment == Experiment::oracle ? curve_body(res.curve) : csv_body(cfg, res);
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(paths.csv, header + stamp + body);
  files.emplace_back(paths.json, json_summary(cfg, res).dump(2) + "\n");
  for (const auto& f : snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_snapshot_t%.6g.csv", stem.c_str(), f.t);
    paths.snapshots.push_back(dir / name);
    files.emplace_back(paths.snapshots.back(), header + stamp + "# t: " + io_detail::num(f.t) + "\n" + field_body(f));
  }
  for (const auto& [p, content] : files) atomic_write(p, content);
  return paths;
}

/// Strips '#' lines, leaving the reproducible body.
inline std::string strip_comments(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    if (text[pos] != '#') out.append(text, pos, end - pos + 1);
    pos = end + 1;
  }
  return out;
}

}  // namespace sheatlab
