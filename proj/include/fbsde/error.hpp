#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbsde {

enum class ErrorCode {
  // coefficient derivation
  SingularSystem,
  Overdetermined,
  Underdetermined,
  UnsupportedOrder,
  DegenerateIndicator,
  // stability
  NonConvergence,
  // simulation
  AllocationTooLarge,
  NonFiniteState,
  // regression
  BasisTooLarge,
  EmptySample,
  DimensionMismatch,
  // problems / solver
  NoClosedForm,
  NonFiniteResponse,
  NotDeterministic,
  UnstableScheme,
  InvalidArgument,
  // statistics / experiments
  TooFewBatches,
  NonPositiveError,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Whether an error stems from bad input (exit code 2) rather than a numerical
/// breakdown (exit code 3).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fbsde
