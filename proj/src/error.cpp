#include "objreloc/error.hpp"

namespace objreloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::NotAnEllipse: return "NotAnEllipse";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NoRealSolution: return "NoRealSolution";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnscoredCandidate: return "UnscoredCandidate";
    case ErrorCode::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::SamplingStalled: return "SamplingStalled";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmbeddingRefOutOfRange: return "EmbeddingRefOutOfRange";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::MissingGroundtruth: return "MissingGroundtruth";
    case ErrorCode::InfeasibleScene: return "InfeasibleScene";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace objreloc
