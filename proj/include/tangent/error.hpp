#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tangent {

// Stable error categories. The string form of each code is part of the
// public contract (CLI stderr JSON, C API, bindings).
enum class ErrorCode {
  kInvalidArgument,
  kResourceLimit,
  kValidation,
  kOutOfHemisphere,
  kCoverageViolation,
  kFormatAspect,
  kFormatDimensions,
  kFormatBitDepth,
  kFormatMeta,
  kIoRead,
  kIoWrite,
  kRange,
  kSourceTooNarrow,
  kInvalidEntry,
  kUndefinedOverlap,
  kInternal,
};

constexpr std::string_view code_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "arg.invalid";
    case ErrorCode::kResourceLimit: return "arg.resource_limit";
    case ErrorCode::kValidation: return "arg.validation";
    case ErrorCode::kOutOfHemisphere: return "geom.out_of_hemisphere";
    case ErrorCode::kCoverageViolation: return "internal.coverage";
    case ErrorCode::kFormatAspect: return "format.aspect";
    case ErrorCode::kFormatDimensions: return "format.dimensions";
    case ErrorCode::kFormatBitDepth: return "format.bit_depth";
    case ErrorCode::kFormatMeta: return "format.meta";
    case ErrorCode::kIoRead: return "io.unreadable";
    case ErrorCode::kIoWrite: return "io.write";
    case ErrorCode::kRange: return "format.range";
    case ErrorCode::kSourceTooNarrow: return "camnorm.source_too_narrow";
    case ErrorCode::kInvalidEntry: return "metrics.invalid_entry";
    case ErrorCode::kUndefinedOverlap: return "overlap.undefined";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

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

}  // namespace tangent
