#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reebldp {

enum class ErrorCode {
  ConfigError,
  InvalidArgument,
  DegenerateCritical,
  NonConvergence,
  BadKind,
  AmbiguousWiring,
  EqualSaddleLevels,
  OutsideBox,
  ContinuityBreak,
  GridMismatch,
  GuardBand,
  NoClosure,
  DegenerateCurve,
  OutOfSpan,
  BoxExit,
  StepTooLarge,
  ChartFail,
  OutsideChart,
  UncoveredEdge,
  Unreachable,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reebldp
