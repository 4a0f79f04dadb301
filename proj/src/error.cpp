#include "fbsde/error.hpp"

namespace fbsde {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Overdetermined: return "Overdetermined";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::DegenerateIndicator: return "DegenerateIndicator";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::AllocationTooLarge: return "AllocationTooLarge";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::BasisTooLarge: return "BasisTooLarge";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoClosedForm: return "NoClosedForm";
    case ErrorCode::NonFiniteResponse: return "NonFiniteResponse";
    case ErrorCode::NotDeterministic: return "NotDeterministic";
    case ErrorCode::UnstableScheme: return "UnstableScheme";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewBatches: return "TooFewBatches";
    case ErrorCode::NonPositiveError: return "NonPositiveError";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularSystem:
    case ErrorCode::DegenerateIndicator:
    case ErrorCode::NonConvergence:
    case ErrorCode::NonFiniteState:
    case ErrorCode::NonFiniteResponse:
    case ErrorCode::NonPositiveError:
      return false;
    default:
      return true;
  }
}

}  // namespace fbsde
