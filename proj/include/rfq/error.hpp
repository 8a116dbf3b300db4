#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfq {

/// Machine-readable failure categories. The CLI maps validation-type codes to
/// exit status 1 and numerical ones to exit status 2.
enum class ErrorCode {
  NonPositiveParameter,
  InvalidArgument,
  EmptyInput,
  GridMismatch,
  OutOfDomain,
  ContourNotConverged,
  QuadratureNotConverged,
  DerivativeNotConverged,
  BetaZero,
  BetaZeroNotRemovable,
  DivergentNorm,
  AsymmetricLimit,
  ZeroDenominator,
  MarginalPUndefined,
  NonPositiveWidth,
  BoundaryNotOnGrid,
  AttractiveFieldRequired,
  OriginPhiUndefined,
  Overflow,
  UnstableStep,
  MassLeak,
  NonPositiveStep,
  NegativeTime,
  IndexOutOfRange,
  PathTooShort,
  ParseError,
  ValidationError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ContourNotConverged: return "ContourNotConverged";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::DerivativeNotConverged: return "DerivativeNotConverged";
    case ErrorCode::BetaZero: return "BetaZero";
    case ErrorCode::BetaZeroNotRemovable: return "BetaZeroNotRemovable";
    case ErrorCode::DivergentNorm: return "DivergentNorm";
    case ErrorCode::AsymmetricLimit: return "AsymmetricLimit";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::MarginalPUndefined: return "MarginalPUndefined";
    case ErrorCode::NonPositiveWidth: return "NonPositiveWidth";
    case ErrorCode::BoundaryNotOnGrid: return "BoundaryNotOnGrid";
    case ErrorCode::AttractiveFieldRequired: return "AttractiveFieldRequired";
    case ErrorCode::OriginPhiUndefined: return "OriginPhiUndefined";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::MassLeak: return "MassLeak";
    case ErrorCode::NonPositiveStep: return "NonPositiveStep";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// True for failures caused by numerics (non-convergence, instability) rather
/// than by bad input.
constexpr bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::ContourNotConverged:
    case ErrorCode::QuadratureNotConverged:
    case ErrorCode::DerivativeNotConverged:
    case ErrorCode::DivergentNorm:
    case ErrorCode::AsymmetricLimit:
    case ErrorCode::ZeroDenominator:
    case ErrorCode::MarginalPUndefined:
    case ErrorCode::Overflow:
    case ErrorCode::UnstableStep:
    case ErrorCode::MassLeak:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string context = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(std::move(message)),
        context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  /// Offending field, node, or parameter; empty when not applicable.
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string context_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message, std::string context = {}) {
  throw Error(code, std::move(message), std::move(context));
}

}  // namespace rfq
