#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wificue {

enum class ErrorCode {
  kMalformed,
  kMulticastAddress,
  kSchemaViolation,
  kMalformedHeader,
  kMalformedLine,
  kEmptyRegistry,
  kEmptyBatch,
  kStorageIo,
  kFutureTimestamp,
  kAuthFailed,
  kQuotaExceeded,
  kNetworkError,
  kMalformedResponse,
  kConfigError,
};

// Stable upper-snake name, e.g. "SCHEMA_VIOLATION".
std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is raised as an Error. `field`
// names the offending input field and `line` is 1-based (0 when the error is
// not tied to a line of input).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string field = {},
        std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string field_;
  std::size_t line_;
};

}  // namespace wificue
