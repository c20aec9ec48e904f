#pragma once

#include <stdexcept>
#include <string>

namespace dhocbf {

/// Rejected input: bad numeric value, malformed file, violated precondition.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Safety QP had no feasible control and the configured policy forbids fallback.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what, long step = -1)
      : std::runtime_error(what), step_index(step) {}

  /// Simulation step at which the QP became infeasible; -1 outside a rollout.
  long step_index;
};

}  // namespace dhocbf
