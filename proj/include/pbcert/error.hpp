#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbcert {

enum class ErrorCode {
  InvalidInput,
  OnAxisRoot,
  NoConvergence,
  SingularAtP,
  TailBoundUnavailable,
  PoleOnLine,
  DegenerateRange,
  NoGap,
  OnEigenvalue,
  NonfiniteState,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::OnAxisRoot: return "OnAxisRoot";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularAtP: return "SingularAtP";
    case ErrorCode::TailBoundUnavailable: return "TailBoundUnavailable";
    case ErrorCode::PoleOnLine: return "PoleOnLine";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::NoGap: return "NoGap";
    case ErrorCode::OnEigenvalue: return "OnEigenvalue";
    case ErrorCode::NonfiniteState: return "NonfiniteState";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported through this type;
/// `code()` lets callers branch without parsing messages.
class CertError : public std::runtime_error {
 public:
  CertError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pbcert
