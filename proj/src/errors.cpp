#include "ptc/errors.hpp"

namespace ptc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NotPinned: return "NotPinned";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularQ2: return "SingularQ2";
    case ErrorCode::SingularPencil: return "SingularPencil";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::NotSND: return "NotSND";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SensitivityInadmissible: return "SensitivityInadmissible";
    case ErrorCode::MissingGrowthRates: return "MissingGrowthRates";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace ptc
