#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seedgate {

// Every failure the engine reports carries one of these tags. The CLI maps
// IoFailure to exit code 2 and everything else to exit code 1.
enum class ErrorCode {
  ZeroNorm,
  LengthMismatch,
  EmptyInput,
  NegativeEntry,
  SinglePixel,
  ShapeMismatch,
  MaskOutOfRange,
  NonFinite,
  ClickOutOfBounds,
  BadSchedule,
  TooFewCandidates,
  MissingFixture,
  InvalidInteraction,
  ZeroNormAnchor,
  BoxOutOfBounds,
  DuplicatePoint,
  TooManyPrompts,
  BadConfig,
  EmptyInitialMask,
  OutOfOrderWrite,
  EmptyBank,
  BadMagic,
  UnsupportedVersion,
  BadElementType,
  TruncatedPayload,
  TrailingPayload,
  ShapeOverflow,
  IoFailure,
  SchemaViolation,
  UnknownSubcommand,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::SinglePixel: return "SinglePixel";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MaskOutOfRange: return "MaskOutOfRange";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ClickOutOfBounds: return "ClickOutOfBounds";
    case ErrorCode::BadSchedule: return "BadSchedule";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::MissingFixture: return "MissingFixture";
    case ErrorCode::InvalidInteraction: return "InvalidInteraction";
    case ErrorCode::ZeroNormAnchor: return "ZeroNormAnchor";
    case ErrorCode::BoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorCode::DuplicatePoint: return "DuplicatePoint";
    case ErrorCode::TooManyPrompts: return "TooManyPrompts";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::EmptyInitialMask: return "EmptyInitialMask";
    case ErrorCode::OutOfOrderWrite: return "OutOfOrderWrite";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::BadElementType: return "BadElementType";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingPayload: return "TrailingPayload";
    case ErrorCode::ShapeOverflow: return "ShapeOverflow";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace seedgate
