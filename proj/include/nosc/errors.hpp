#pragma once

#include <stdexcept>
#include <string>

namespace nosc {

// Bad configuration or parameters (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite state during integration (CLI exit code 3).
struct InstabilityError : std::runtime_error {
  InstabilityError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step(step) {}
  long step;
};

// A tolerance/budget could not be met (CLI exit code 4).
struct BudgetError : std::runtime_error {
  BudgetError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage(stage) {}
  std::string stage;
};

}  // namespace nosc
