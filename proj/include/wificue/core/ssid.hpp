#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

namespace wificue {

// Raw network name, 0-32 arbitrary bytes. Empty means a hidden network.
class Ssid {
 public:
  static constexpr std::size_t kMaxBytes = 32;

  Ssid() = default;
  // Throws Error(kSchemaViolation) when longer than 32 bytes.
  explicit Ssid(std::string bytes);

  const std::string& bytes() const noexcept { return bytes_; }
  bool hidden() const noexcept { return bytes_.empty(); }
  // UTF-8 with U+FFFD substituted for invalid sequences.
  std::string display() const;

  auto operator<=>(const Ssid&) const = default;

 private:
  std::string bytes_;
};

}  // namespace wificue
