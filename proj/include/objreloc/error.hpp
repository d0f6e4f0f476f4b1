#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace objreloc {

enum class ErrorCode {
  InvalidArgument,
  InvariantViolation,
  DegenerateProjection,
  NotAnEllipse,
  DegenerateSample,
  NoRealSolution,
  DimensionMismatch,
  ZeroVector,
  UnscoredCandidate,
  InsufficientCandidates,
  SamplingStalled,
  NoSolution,
  ParseError,
  EmbeddingRefOutOfRange,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  MissingGroundtruth,
  InfeasibleScene,
  EmptyInput,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI, the bench runner) can branch on the kind of failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace objreloc
