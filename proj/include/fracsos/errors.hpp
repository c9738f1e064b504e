#pragma once

#include <stdexcept>
#include <string>

namespace fracsos {

/// Malformed input: bad dimensions, degrees, asymmetric data, incomplete moments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when evaluating a semi-algebraic function fails.
class EvaluationError : public std::runtime_error {
 public:
  enum class Kind { empty_omega, omega_not_compact, solver_failure };

  EvaluationError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace fracsos
