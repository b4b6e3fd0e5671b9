#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qbound {

enum class ErrorKind {
  NonHermitian,
  NumericalFailure,
  NegativeEigenvalue,
  DimensionMismatch,
  DimensionCap,
  NonUnitAxis,
  OutOfDomain,
  OrderUnavailable,
  OutOfRange,
  DuplicateOffset,
  ZeroOffset,
  SupportViolation,
  RangeViolation,
  NonRealEntry,
  SingularState,
  OptimizerBudgetExceeded,
  DegenerateLikelihood,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures are reported through this type. The message is
// prefixed with the operation that raised it, e.g. "omega_apply: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view operation, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  ErrorKind kind_;
  std::string operation_;
};

}  // namespace qbound
