#include "qbound/errors.hpp"

namespace qbound {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::NonUnitAxis: return "NonUnitAxis";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::OrderUnavailable: return "OrderUnavailable";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DuplicateOffset: return "DuplicateOffset";
    case ErrorKind::ZeroOffset: return "ZeroOffset";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::NonRealEntry: return "NonRealEntry";
    case ErrorKind::SingularState: return "SingularState";
    case ErrorKind::OptimizerBudgetExceeded: return "OptimizerBudgetExceeded";
    case ErrorKind::DegenerateLikelihood: return "DegenerateLikelihood";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string_view operation, const std::string& detail)
    : std::runtime_error(std::string(operation) + ": " + std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      operation_(operation) {}

}  // namespace qbound
