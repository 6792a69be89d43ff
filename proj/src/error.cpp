#include "mcopt/error.hpp"

namespace mcopt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::ScalingResidualTooLarge: return "ScalingResidualTooLarge";
    case ErrorCode::TargetBelowZetaZero: return "TargetBelowZetaZero";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficientA: return "RankDeficientA";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::SingularReduced: return "SingularReduced";
    case ErrorCode::CorrectorStall: return "CorrectorStall";
    case ErrorCode::PredictorStall: return "PredictorStall";
    case ErrorCode::IterLimit: return "IterLimit";
    case ErrorCode::StencilOutsideDomain: return "StencilOutsideDomain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace mcopt
