#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlh {

enum class ErrorCode {
  InvalidRegime,
  DoubleRoot,
  UnsupportedDimension,
  InvalidExponent,
  OrderOverflow,
  ZeroArgument,
  LaplaceDimension,
  FitFailure,
  SingularShell,
  ShapeMismatch,
  NonConvergent,
  NotInUPlus,
  StalledLineSearch,
  MaxIterations,
  ZeroField,
  InvalidWeight,
  Precondition,
  ParseError,
  ValidationError,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRegime: return "InvalidRegime";
    case ErrorCode::DoubleRoot: return "DoubleRoot";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::OrderOverflow: return "OrderOverflow";
    case ErrorCode::ZeroArgument: return "ZeroArgument";
    case ErrorCode::LaplaceDimension: return "LaplaceDimension";
    case ErrorCode::FitFailure: return "FitFailure";
    case ErrorCode::SingularShell: return "SingularShell";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NotInUPlus: return "NotInUPlus";
    case ErrorCode::StalledLineSearch: return "StalledLineSearch";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code logic) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace nlh
