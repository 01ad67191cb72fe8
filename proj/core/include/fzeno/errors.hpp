#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fzeno {

enum class ErrorCode {
  AllZero,
  InvalidModel,
  ContinuationUnavailable,
  QuadratureFailure,
  UnsupportedMoment,
  MomentDivergent,
  EpsilonZero,
  NewtonStall,
  MultiplicityAmbiguous,
  DegenerateResidue,
  NotDegenerate,
  StructureMismatch,
  IncompletePoleSet,
  DiagonalizationFailure,
  NonpositiveProbability,
  NonAnalyticFamily,
  NoResonance,
  NoCrossing,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string operation, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& operation() const noexcept { return operation_; }
  // configuration problems map to exit code 2, everything else to 3
  bool is_config_error() const noexcept;

 private:
  ErrorCode code_;
  std::string operation_;
};

}  // namespace fzeno
