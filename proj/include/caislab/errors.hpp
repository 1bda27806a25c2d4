#pragma once

#include <stdexcept>
#include <string>

namespace caislab {

// Bad values in a config file or CLI flag. Message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// NaN or infinity detected in simulation or learner state. Carries the step
// index where the check tripped.
class NumericalInstability : public std::runtime_error {
 public:
  NumericalInstability(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// Misuse of an internal API (mismatched sizes, stale traces).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace caislab
