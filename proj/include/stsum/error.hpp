#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stsum {

/// Error classes surfaced by the library. The CLI maps each one to its own
/// process exit code.
enum class ErrorCode {
  invalid_argument = 2,
  undefined_conditional = 3,
  internal_error = 4,
  unsupported_shape = 5,
  empty_input = 6,
  invalid_sequence = 7,
  io_error = 8,
  schedule_conflict = 9,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::undefined_conditional: return "undefined-conditional";
    case ErrorCode::internal_error: return "internal-error";
    case ErrorCode::unsupported_shape: return "unsupported-shape";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::invalid_sequence: return "invalid-sequence";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::schedule_conflict: return "schedule-conflict";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace stsum
