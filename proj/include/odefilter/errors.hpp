#pragma once

#include <stdexcept>
#include <string>

namespace odefilter {

// Invalid user-facing configuration. `field` names the offending parameter.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument("--" + field + ": " + message), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A computation produced a non-finite value or otherwise broke down.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact (R = 0) measurement inconsistent with a degenerate predicted covariance.
class FilterDivergence : public NumericalError {
 public:
  FilterDivergence(long step, const std::string& message)
      : NumericalError(step < 0 ? message : "step " + std::to_string(step) + ": " + message),
        step_(step) {}

  // Zero-based step index, or -1 when raised outside a solve loop.
  [[nodiscard]] long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace odefilter
