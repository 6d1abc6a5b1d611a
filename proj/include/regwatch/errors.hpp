#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regwatch {

// Every failure the library reports carries one of these codes plus a
// human-readable detail string (field name, line number, offending value).
enum class ErrorCode {
  malformed_input,
  missing_field,
  empty_body,
  unknown_entity_type,
  duplicate_citation,
  source_unavailable,
  span_out_of_range,
  invalid_threshold,
  storage_failure,
  empty_surface,
  syntax_error,
  unknown_field,
  cycle_detected,
  multiple_roots,
  orphan_term,
  unknown_term,
  unsupported_pattern,
  config_error,
  arithmetic_overflow,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_input: return "MalformedInput";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::empty_body: return "EmptyBody";
    case ErrorCode::unknown_entity_type: return "UnknownEntityType";
    case ErrorCode::duplicate_citation: return "DuplicateCitation";
    case ErrorCode::source_unavailable: return "SourceUnavailable";
    case ErrorCode::span_out_of_range: return "SpanOutOfRange";
    case ErrorCode::invalid_threshold: return "InvalidThreshold";
    case ErrorCode::storage_failure: return "StorageFailure";
    case ErrorCode::empty_surface: return "EmptySurface";
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::unknown_field: return "UnknownField";
    case ErrorCode::cycle_detected: return "CycleDetected";
    case ErrorCode::multiple_roots: return "MultipleRoots";
    case ErrorCode::orphan_term: return "OrphanTerm";
    case ErrorCode::unknown_term: return "UnknownTerm";
    case ErrorCode::unsupported_pattern: return "UnsupportedPattern";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::arithmetic_overflow: return "ArithmeticOverflow";
  }
  return "Error";
}

}  // namespace regwatch
