#pragma once

#include <stdexcept>
#include <string>

namespace tvbench {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kEmptyMask,
  kNoValidKeypoints,
  kInsufficientData,
  kSchema,
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tvbench
