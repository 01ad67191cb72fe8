#include "fzeno/errors.hpp"

namespace fzeno {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ContinuationUnavailable: return "ContinuationUnavailable";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::UnsupportedMoment: return "UnsupportedMoment";
    case ErrorCode::MomentDivergent: return "MomentDivergent";
    case ErrorCode::EpsilonZero: return "EpsilonZero";
    case ErrorCode::NewtonStall: return "NewtonStall";
    case ErrorCode::MultiplicityAmbiguous: return "MultiplicityAmbiguous";
    case ErrorCode::DegenerateResidue: return "DegenerateResidue";
    case ErrorCode::NotDegenerate: return "NotDegenerate";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
    case ErrorCode::IncompletePoleSet: return "IncompletePoleSet";
    case ErrorCode::DiagonalizationFailure: return "DiagonalizationFailure";
    case ErrorCode::NonpositiveProbability: return "NonpositiveProbability";
    case ErrorCode::NonAnalyticFamily: return "NonAnalyticFamily";
    case ErrorCode::NoResonance: return "NoResonance";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string operation, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + " in " + operation + ": " + detail),
      code_(code),
      operation_(std::move(operation)) {}

bool Error::is_config_error() const noexcept {
  return code_ == ErrorCode::ConfigError || code_ == ErrorCode::InvalidModel ||
         code_ == ErrorCode::AllZero || code_ == ErrorCode::StructureMismatch ||
         code_ == ErrorCode::IoError;
}

}  // namespace fzeno
