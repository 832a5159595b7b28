#pragma once

#include <stdexcept>
#include <string>

namespace chronoseq {

enum class ErrorCode {
  validation,
  not_found,
  conflict,
  checksum,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. The service maps codes onto
/// HTTP statuses and the CLI onto exit codes.
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

}  // namespace chronoseq
