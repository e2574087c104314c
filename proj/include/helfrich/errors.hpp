#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace helfrich {

enum class ErrorCode {
  InvalidSlope,
  EpsTooLarge,
  NonPositiveRadius,
  SingularDenominator,
  BadSwitch,
  StepUnderflow,
  MissingEvent,
  OutOfRange,
  NotBiconcave,
  InvalidConfig,
};

constexpr std::string_view toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSlope: return "InvalidSlope";
    case ErrorCode::EpsTooLarge: return "EpsTooLarge";
    case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::BadSwitch: return "BadSwitch";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::MissingEvent: return "MissingEvent";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NotBiconcave: return "NotBiconcave";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// the CLI can report it by name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(toString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace helfrich
