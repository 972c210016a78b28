#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace triage {

enum class ErrorCode {
  kIo,
  kParse,
  kSchema,
  kNoRows,
  kArity,
  kAllMissing,
  kUnknownCategory,
  kMissingField,
  kInvalidField,
  kClassTooSmall,
  kShapeMismatch,
  kInvalidArgument,
  kNonFinite,
  kVersionMismatch,
  kChecksum,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code so the
// CLI and HTTP layers can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace triage
