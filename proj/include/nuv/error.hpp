#pragma once

#include <stdexcept>
#include <string>

namespace nuv {

enum class ErrorKind {
  InconsistentDirac,
  NotApplicable,
  InvalidProblem,
  DimensionMismatch,
  UnderdeterminedModel,
  InfeasibleConfig,
  ConfigError,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` selects the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nuv
