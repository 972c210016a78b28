#include "triage/common/error.hpp"

namespace triage {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kNoRows: return "no_rows";
    case ErrorCode::kArity: return "arity";
    case ErrorCode::kAllMissing: return "all_missing";
    case ErrorCode::kUnknownCategory: return "unknown_category";
    case ErrorCode::kMissingField: return "missing_field";
    case ErrorCode::kInvalidField: return "invalid_field";
    case ErrorCode::kClassTooSmall: return "class_too_small";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kChecksum: return "checksum";
  }
  return "unknown";
}

}  // namespace triage
