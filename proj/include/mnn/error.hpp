#pragma once

#include <stdexcept>
#include <string>

namespace mnn {

/// Failure categories. The CLI prints `kind_name()` as the machine-parsable
/// error class.
enum class ErrorKind {
  Config,
  Data,
  Usage,
  Domain,
  State,
  Estimation,
  DatasetNotFound,
  Io,
};

const char* kind_name(ErrorKind kind) noexcept;

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

}  // namespace mnn
