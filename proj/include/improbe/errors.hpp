#pragma once

#include <stdexcept>
#include <string>

namespace improbe {

// Coarse error classes; the CLI maps each to a distinct exit code.
enum class ErrorKind {
  invalid_argument,  // caller broke a precondition
  io,                // missing input or unwritable output
  format,            // malformed or corrupted file content
  numeric,           // fit failed: separation, non-convergence, degenerate data
};

const char* error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace improbe
