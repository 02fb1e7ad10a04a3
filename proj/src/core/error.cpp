#include "wificue/core/error.hpp"

namespace wificue {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformed: return "MALFORMED";
    case ErrorCode::kMulticastAddress: return "MULTICAST_ADDRESS";
    case ErrorCode::kSchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::kMalformedHeader: return "MALFORMED_HEADER";
    case ErrorCode::kMalformedLine: return "MALFORMED_LINE";
    case ErrorCode::kEmptyRegistry: return "EMPTY_REGISTRY";
    case ErrorCode::kEmptyBatch: return "EMPTY_BATCH";
    case ErrorCode::kStorageIo: return "STORAGE_IO";
    case ErrorCode::kFutureTimestamp: return "FUTURE_TIMESTAMP";
    case ErrorCode::kAuthFailed: return "AUTH_FAILED";
    case ErrorCode::kQuotaExceeded: return "QUOTA_EXCEEDED";
    case ErrorCode::kNetworkError: return "NETWORK_ERROR";
    case ErrorCode::kMalformedResponse: return "MALFORMED_RESPONSE";
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
  }
  return "UNKNOWN_ERROR";
}

Error::Error(ErrorCode code, const std::string& message, std::string field,
             std::size_t line)
    : std::runtime_error(message),
      code_(code),
      field_(std::move(field)),
      line_(line) {}

}  // namespace wificue
