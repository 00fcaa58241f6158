#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sheatlab {

/// Invalid experiment or grid configuration. `key` names the offending
/// setting; `line` is the config-file line (0 when it came from a flag or a
/// programmatic struct).
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what, std::size_t line = 0)
      : std::runtime_error(format(key, what, line)), key_(std::move(key)), detail_(what), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  /// The message without the key and line prefix.
  const std::string& detail() const noexcept { return detail_; }
  std::size_t line() const noexcept { return line_; }

private:
  static std::string format(const std::string& key, const std::string& what, std::size_t line) {
    std::string msg = "config error [" + key + "]";
    if (line != 0) msg += " at line " + std::to_string(line);
    return msg + ": " + what;
  }

  std::string key_;
  std::string detail_;
  std::size_t line_;
};

/// The solver produced NaN or Inf.
class NonFinite : public std::runtime_error {
public:
  NonFinite(std::size_t step, std::size_t cell, double value)
      : std::runtime_error("non-finite solution value " + std::to_string(value) + " at step " +
                           std::to_string(step) + ", cell " + std::to_string(cell)),
        step_(step), cell_(cell) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t cell() const noexcept { return cell_; }

private:
  std::size_t step_;
  std::size_t cell_;
};

class NonConvergence : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A regression was asked to fit a law over too narrow a range of abscissae.
class InsufficientRange : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class NonPositive : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sheatlab
