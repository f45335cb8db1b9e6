#pragma once

#include <stdexcept>
#include <string>

namespace tcode {

/// Out-of-range or malformed argument to a model operation.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Load at or beyond the pole of the delay formula (rho >= 1, or rho >= R when coded).
class SaturationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Topology that violates connectivity or endpoint constraints.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model bug: scheduling into the past, double completion, broken conservation.
class SimulationLogicError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid experiment configuration. `key()` names the offending setting when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace tcode
