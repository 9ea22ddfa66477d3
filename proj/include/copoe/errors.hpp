#pragma once

#include <stdexcept>
#include <string>

namespace copoe {

/// Invalid dimension, index, or out-of-range numeric argument.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A behavior policy assigns zero probability to an action on a stored path.
class DegenerateSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Objects built against different geometry snapshots were combined.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Configuration problems. `key()` names the offending entry when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Requested telemetry was not recorded.
class IncompleteReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace copoe
