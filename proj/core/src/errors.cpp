#include "reebldp/errors.hpp"

namespace reebldp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateCritical: return "DegenerateCritical";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::BadKind: return "BadKind";
    case ErrorCode::AmbiguousWiring: return "AmbiguousWiring";
    case ErrorCode::EqualSaddleLevels: return "EqualSaddleLevels";
    case ErrorCode::OutsideBox: return "OutsideBox";
    case ErrorCode::ContinuityBreak: return "ContinuityBreak";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GuardBand: return "GuardBand";
    case ErrorCode::NoClosure: return "NoClosure";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::OutOfSpan: return "OutOfSpan";
    case ErrorCode::BoxExit: return "BoxExit";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::ChartFail: return "ChartFail";
    case ErrorCode::OutsideChart: return "OutsideChart";
    case ErrorCode::UncoveredEdge: return "UncoveredEdge";
    case ErrorCode::Unreachable: return "Unreachable";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace reebldp
