#pragma once

#include <stdexcept>
#include <string>

namespace hdrpmp {

enum class ErrorCode {
  invalid_argument,
  underdetermined,
  empty_domain,
  unsupported_schedule,
  load_error,
  io_error,
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::underdetermined: return "underdetermined";
    case ErrorCode::empty_domain: return "empty-domain";
    case ErrorCode::unsupported_schedule: return "unsupported-schedule";
    case ErrorCode::load_error: return "load-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hdrpmp
