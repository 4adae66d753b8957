#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace classmind {

enum class ErrorCode {
  kRange,
  kOverlap,
  kParse,
  kSchemaViolation,
  kBackendUnavailable,
  kWindowTooLong,
  kPrecondition,
  kUnknownCode,
  kDependencyMissing,
  kLessonNotFound,
  kNotFound,
  kHashMismatch,
  kEmptyTimestamps,
  kEmptyUnion,
  kConfig,
  kIllegalTransition,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the engine carries a machine-readable code so the
// CLI and HTTP layers can map it to exit codes / status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(const std::string& message, int attempts)
      : Error(ErrorCode::kSchemaViolation, message), attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kPrecondition, message);
}

}  // namespace classmind
