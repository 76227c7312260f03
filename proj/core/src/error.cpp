#include "asp/error.hpp"

namespace asp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DenominatorNearZero: return "DenominatorNearZero";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ZeroDiagonal: return "ZeroDiagonal";
    case ErrorCode::UnderdeterminedNewState: return "UnderdeterminedNewState";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

NotConverged::NotConverged(const std::string& what, double final_residual)
    : Error(ErrorCode::NotConverged, what), final_residual_(final_residual) {}

ExperimentError::ExperimentError(ErrorCode code, std::size_t iteration, const std::string& what)
    : Error(code, "iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

bool is_numerical_failure(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DenominatorNearZero:
    case ErrorCode::NotConverged:
    case ErrorCode::RankDeficient:
    case ErrorCode::NegativeEigenvalue:
    case ErrorCode::UnderdeterminedNewState:
    case ErrorCode::NonFinite:
      return true;
    default:
      return false;
  }
}

}  // namespace asp
