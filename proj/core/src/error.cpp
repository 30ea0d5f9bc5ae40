#include "lorentzfk/error.hpp"

namespace lfk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotAProbability: return "NotAProbability";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::InfiniteVariance: return "InfiniteVariance";
    case ErrorCode::MalformedTree: return "MalformedTree";
    case ErrorCode::NotATriangulation: return "NotATriangulation";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InadmissibleJ: return "InadmissibleJ";
    case ErrorCode::NonpositiveBeta: return "NonpositiveBeta";
    case ErrorCode::BadSliceCount: return "BadSliceCount";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::MismatchedPaths: return "MismatchedPaths";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::OverlappingSupports: return "OverlappingSupports";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::NotEnoughSamples: return "NotEnoughSamples";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::NonpositiveB: return "NonpositiveB";
    case ErrorCode::NotEnoughPoints: return "NotEnoughPoints";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::GuardExceeded: return "GuardExceeded";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace lfk
