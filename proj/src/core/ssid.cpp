#include "wificue/core/ssid.hpp"

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"

namespace wificue {

Ssid::Ssid(std::string bytes) : bytes_(std::move(bytes)) {
  if (bytes_.size() > kMaxBytes) {
    throw Error(ErrorCode::kSchemaViolation,
                "SSID is " + std::to_string(bytes_.size()) +
                    " bytes, maximum is 32",
                "ssid");
  }
}

std::string Ssid::display() const { return utf8_lossy(bytes_); }

}  // namespace wificue
