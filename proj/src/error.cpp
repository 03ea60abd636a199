#include "nuv/error.hpp"

namespace nuv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InconsistentDirac: return "InconsistentDirac";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnderdeterminedModel: return "UnderdeterminedModel";
    case ErrorKind::InfeasibleConfig: return "InfeasibleConfig";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace nuv
