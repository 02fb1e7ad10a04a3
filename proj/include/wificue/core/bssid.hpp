#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace wificue {

// The radio MAC address of an access point. Always unicast; the canonical
// text form is lower-case, colon-separated hex.
class Bssid {
 public:
  using Octets = std::array<std::uint8_t, 6>;

  static constexpr std::uint8_t kMulticastBit = 0x01;
  static constexpr std::uint8_t kLocallyAdministeredBit = 0x02;

  // Throws Error(kMalformed) or Error(kMulticastAddress).
  static Bssid from_octets(const Octets& octets);

  const Octets& octets() const noexcept { return octets_; }
  std::string to_string() const;

  // Compares byte-wise, which matches ordering of the canonical text.
  auto operator<=>(const Bssid&) const = default;

 private:
  explicit Bssid(const Octets& octets) : octets_(octets) {}
  Octets octets_{};
};

// Accepts upper or lower case hex with ':' or '-' separators.
Bssid parse_bssid(std::string_view text);

// Hyphenated form used for fixture file names, e.g. "00-14-22-01-23-45".
std::string bssid_dashed(const Bssid& bssid);

}  // namespace wificue

template <>
struct std::hash<wificue::Bssid> {
  std::size_t operator()(const wificue::Bssid& b) const noexcept {
    std::uint64_t v = 0;
    for (auto o : b.octets()) v = (v << 8) | o;
    return std::hash<std::uint64_t>{}(v);
  }
};
