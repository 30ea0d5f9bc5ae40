#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfk {

enum class ErrorCode {
  NotAProbability,
  NotCritical,
  InfiniteVariance,
  MalformedTree,
  NotATriangulation,
  UnknownVertex,
  EmptyInput,
  InadmissibleJ,
  NonpositiveBeta,
  BadSliceCount,
  DimensionMismatch,
  RankDeficient,
  MismatchedPaths,
  ZeroDistance,
  OverlappingSupports,
  TooLarge,
  WindowTooLarge,
  NotEnoughSamples,
  GridMismatch,
  DegenerateWeights,
  NonpositiveB,
  NotEnoughPoints,
  ParseError,
  ConfigInvalid,
  GuardExceeded,
  NumericalFailure,
  IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace lfk
