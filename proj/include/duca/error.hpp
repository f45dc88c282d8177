#pragma once

#include <stdexcept>
#include <string>

namespace duca {

// Error classes map 1:1 to CLI exit codes (see Error::exit_code).
enum class ErrorKind {
  InvalidInput,
  Format,
  Integrity,
  DigestMismatch,
  MissingFeature,
  Convergence,
  Unsupported,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::InvalidInput:   return 2;
      case ErrorKind::Format:         return 3;
      case ErrorKind::Integrity:      return 4;
      case ErrorKind::DigestMismatch: return 5;
      case ErrorKind::MissingFeature: return 6;
      case ErrorKind::Convergence:    return 7;
      case ErrorKind::Unsupported:    return 8;
      case ErrorKind::Io:             return 9;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace duca
