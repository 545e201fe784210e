#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracreg {

/// Machine-readable failure tags. The CLI prints them on stderr as
/// `error[<Tag>]: <message>` and maps them onto exit codes.
enum class ErrorCode {
  DomainViolation,
  DenominatorNearZero,
  InfeasibleAtGammaZero,
  NonmonotoneSchedule,
  ThetaOutOfRange,
  BvpNoConvergence,
  GridTooCoarse,
  ProfileRangeExceeded,
  QuadratureUnresolved,
  ZeroField,
  CflViolation,
  NanDetected,
  NegativeInput,
  CylinderOutOfWindow,
  RadiusUnresolved,
  NonDyadicLambda,
  DegenerateDenominator,
  BadTestFunction,
  EmptySet,
  WindowTooNarrow,
  ConfigError,
  IoError,
  InvariantViolation,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::DenominatorNearZero: return "DenominatorNearZero";
    case ErrorCode::InfeasibleAtGammaZero: return "InfeasibleAtGammaZero";
    case ErrorCode::NonmonotoneSchedule: return "NonmonotoneSchedule";
    case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::BvpNoConvergence: return "BvpNoConvergence";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::ProfileRangeExceeded: return "ProfileRangeExceeded";
    case ErrorCode::QuadratureUnresolved: return "QuadratureUnresolved";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::NanDetected: return "NanDetected";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::CylinderOutOfWindow: return "CylinderOutOfWindow";
    case ErrorCode::RadiusUnresolved: return "RadiusUnresolved";
    case ErrorCode::NonDyadicLambda: return "NonDyadicLambda";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::BadTestFunction: return "BadTestFunction";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace fracreg
