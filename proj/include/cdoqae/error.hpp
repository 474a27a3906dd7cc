#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdoqae {

enum class ErrorCode {
  kInvalidArgument,  // precondition violated by a caller-supplied value
  kOutOfRange,       // index or threshold outside its admissible range
  kNumerical,        // singular formula, failed bracketing, non-convergence
  kBudgetExceeded,   // qubit or enumeration budget
  kConfig,           // malformed or invalid configuration document
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine. `code()` lets front ends map errors to
/// exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace cdoqae
