#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace outsync {

/// Thrown when matrix or vector shapes do not match an operation's contract.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FailureKind {
  kNotInformative,
  kNotStabilizable,
  kInfeasible,
  kDesignFailed,
};

const char* ToString(FailureKind kind);

/// A design step could not produce a certified result.
///
/// `agent` is the zero-based agent position when the failure is local to one
/// agent. `condition` names the solvability condition that failed, using the
/// labels of the model-based (i, ii, iii) and data-driven (ia..iic)
/// characterizations, or c2/c5 for the observer designs.
class DesignError : public std::runtime_error {
 public:
  DesignError(FailureKind kind, const std::string& message,
              std::optional<int> agent = std::nullopt,
              std::string condition = {});

  FailureKind kind() const { return kind_; }
  const std::optional<int>& agent() const { return agent_; }
  const std::string& condition() const { return condition_; }

 private:
  FailureKind kind_;
  std::optional<int> agent_;
  std::string condition_;
};

}  // namespace outsync
