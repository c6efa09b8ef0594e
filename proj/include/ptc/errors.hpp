#pragma once

#include <stdexcept>
#include <string>

namespace ptc {

enum class ErrorCode {
  NotSymmetric,
  DimensionMismatch,
  InvalidArgument,
  Disconnected,
  NotPinned,
  IndexOutOfRange,
  SingularQ2,
  SingularPencil,
  NotSPD,
  NotSND,
  NotHurwitz,
  Infeasible,
  SensitivityInadmissible,
  MissingGrowthRates,
  OutOfDomain,
  NonFinite,
  StepUnderflow,
  StepBudgetExceeded,
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ptc
