#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace opencat {

enum class ErrorCode {
  kParseError,
  kDegenerateCloud,
  kIoError,
  kEmptyDataset,
  kInvalidMatrix,
  kEmptyView,
  kInvalidColorspace,
  kBackendError,
  kInvalidFeature,
  kLayoutError,
  kLogError,
  kEmptyInput,
  kConfigError,
};

/// Stable identifier used in structured error output ("ParseError", ...).
std::string_view error_code_name(ErrorCode code);

/// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed input; `line` is 1-based, 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason);

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// Rethrows `e` with its code preserved and the message prefixed by `stage`.
[[noreturn]] void rethrow_with_stage(const Error& e, std::string_view stage);

}  // namespace opencat
