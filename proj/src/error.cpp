#include "cdoqae/error.hpp"

namespace cdoqae {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kOutOfRange:
      return "out_of_range";
    case ErrorCode::kNumerical:
      return "numerical";
    case ErrorCode::kBudgetExceeded:
      return "budget_exceeded";
    case ErrorCode::kConfig:
      return "config";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace cdoqae
