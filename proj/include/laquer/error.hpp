#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laquer {

enum class ErrorCode {
  InvalidArgument,
  InvalidUtf8,
  MalformedRecord,
  OffsetOutOfRange,
  EmptyQuery,
  TargetMismatch,
  UnknownDocId,
  EmptyResponse,
  ProviderExhausted,
  BadMagic,
  DimMismatch,
  TokenOffsetOutOfRange,
  ZeroVector,
  EmptySpan,
  MissingHiddenStates,
  NotFound,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidUtf8: return "InvalidUtf8";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::OffsetOutOfRange: return "OffsetOutOfRange";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::TargetMismatch: return "TargetMismatch";
    case ErrorCode::UnknownDocId: return "UnknownDocId";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::ProviderExhausted: return "ProviderExhausted";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TokenOffsetOutOfRange: return "TokenOffsetOutOfRange";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptySpan: return "EmptySpan";
    case ErrorCode::MissingHiddenStates: return "MissingHiddenStates";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure surfaced by the engine. `code()` is stable and is what the
/// HTTP layer and the tests key on; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by parse_metadata; carries the 1-based line that failed.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line_no, const std::string& detail)
      : Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + detail),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace laquer
