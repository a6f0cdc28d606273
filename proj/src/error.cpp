#include "agingscope/error.hpp"

namespace agingscope {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnpairedConfig: return "UnpairedConfig";
    case ErrorCode::SingleLevel: return "SingleLevel";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::MalformedDuration: return "MalformedDuration";
    case ErrorCode::MalformedGcLine: return "MalformedGcLine";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::NonNumericField: return "NonNumericField";
    case ErrorCode::MalformedStatLine: return "MalformedStatLine";
    case ErrorCode::AllTied: return "AllTied";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ZeroRange: return "ZeroRange";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
    case ErrorCode::ZeroGroupVariance: return "ZeroGroupVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace agingscope
