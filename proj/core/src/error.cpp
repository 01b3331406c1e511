#include "opencat/error.hpp"

namespace opencat {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDegenerateCloud: return "DegenerateCloud";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidMatrix: return "InvalidMatrix";
    case ErrorCode::kEmptyView: return "EmptyView";
    case ErrorCode::kInvalidColorspace: return "InvalidColorspace";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kInvalidFeature: return "InvalidFeature";
    case ErrorCode::kLayoutError: return "LayoutError";
    case ErrorCode::kLogError: return "LogError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& reason)
    : Error(ErrorCode::kParseError,
            line > 0 ? "line " + std::to_string(line) + ": " + reason : reason),
      line_(line),
      reason_(reason) {}

void rethrow_with_stage(const Error& e, std::string_view stage) {
  throw Error(e.code(), std::string(stage) + ": " + e.what());
}

}  // namespace opencat
