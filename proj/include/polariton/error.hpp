#pragma once

#include <stdexcept>
#include <string>

namespace polariton {

enum class ErrorCode {
  invalid_model,
  invalid_stack,
  not_tunable,
  bad_start,
  jacobian,
  fit_failed,
  degenerate_fit,
  undefined_ratio,
  undefined_mixture,
  unresolved_splitting,
  insufficient_data,
  no_crossing,
  invalid_law,
  alignment,
  unphysical_balance,
  bad_reference,
  parse,
  order,
  schema,
  io,
};

/// Coarse grouping used by the command-line front end to pick an exit status.
enum class ErrorCategory { schema, fit, io, domain };

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_model: return "invalid-model";
    case ErrorCode::invalid_stack: return "invalid-stack";
    case ErrorCode::not_tunable: return "not-tunable";
    case ErrorCode::bad_start: return "bad-start";
    case ErrorCode::jacobian: return "jacobian";
    case ErrorCode::fit_failed: return "fit-failed";
    case ErrorCode::degenerate_fit: return "degenerate-fit";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::undefined_mixture: return "undefined-mixture";
    case ErrorCode::unresolved_splitting: return "unresolved-splitting";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::no_crossing: return "no-crossing";
    case ErrorCode::invalid_law: return "invalid-law";
    case ErrorCode::alignment: return "alignment";
    case ErrorCode::unphysical_balance: return "unphysical-balance";
    case ErrorCode::bad_reference: return "bad-reference";
    case ErrorCode::parse: return "parse";
    case ErrorCode::order: return "order";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

inline ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema:
    case ErrorCode::invalid_model:
    case ErrorCode::invalid_stack:
    case ErrorCode::invalid_law:
      return ErrorCategory::schema;
    case ErrorCode::bad_start:
    case ErrorCode::jacobian:
    case ErrorCode::fit_failed:
    case ErrorCode::degenerate_fit:
    case ErrorCode::insufficient_data:
    case ErrorCode::unresolved_splitting:
      return ErrorCategory::fit;
    case ErrorCode::io:
    case ErrorCode::parse:
    case ErrorCode::order:
      return ErrorCategory::io;
    default:
      return ErrorCategory::domain;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polariton
