#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reslab {

enum class ErrorCode {
  InvalidArgument,
  OddDegree,
  NonzeroConstant,
  NonMonotoneW,
  OutOfCertifiedRange,
  DegreeNotTwo,
  BelowBarrierEnergy,
  InvalidPolygon,
  DegenerateClip,
  ThetaOutOfRange,
  NumericalCornerAmbiguity,
  IdentityViolation,
  ZeroVector,
  NotPeriodic,
  BreakpointTheta,
  BoxTooLarge,
  InsufficientOffset,
  RatioOne,
  InfeasiblePositivity,
  NotQuasiPeriodic,
  EventLocalizationFailure,
  EnergyDriftExceeded,
  OffShell,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OddDegree: return "OddDegree";
    case ErrorCode::NonzeroConstant: return "NonzeroConstant";
    case ErrorCode::NonMonotoneW: return "NonMonotoneW";
    case ErrorCode::OutOfCertifiedRange: return "OutOfCertifiedRange";
    case ErrorCode::DegreeNotTwo: return "DegreeNotTwo";
    case ErrorCode::BelowBarrierEnergy: return "BelowBarrierEnergy";
    case ErrorCode::InvalidPolygon: return "InvalidPolygon";
    case ErrorCode::DegenerateClip: return "DegenerateClip";
    case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::NumericalCornerAmbiguity: return "NumericalCornerAmbiguity";
    case ErrorCode::IdentityViolation: return "IdentityViolation";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::BreakpointTheta: return "BreakpointTheta";
    case ErrorCode::BoxTooLarge: return "BoxTooLarge";
    case ErrorCode::InsufficientOffset: return "InsufficientOffset";
    case ErrorCode::RatioOne: return "RatioOne";
    case ErrorCode::InfeasiblePositivity: return "InfeasiblePositivity";
    case ErrorCode::NotQuasiPeriodic: return "NotQuasiPeriodic";
    case ErrorCode::EventLocalizationFailure: return "EventLocalizationFailure";
    case ErrorCode::EnergyDriftExceeded: return "EnergyDriftExceeded";
    case ErrorCode::OffShell: return "OffShell";
  }
  return "Unknown";
}

/// All library failures are reported through this exception; `code()` is
/// stable and is what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace reslab
