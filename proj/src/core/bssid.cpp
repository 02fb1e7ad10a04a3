#include "wificue/core/bssid.hpp"

#include <cstdio>

#include "wificue/core/error.hpp"

namespace wificue {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string format(const Bssid::Octets& o, char sep) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x%c%02x%c%02x%c%02x%c%02x%c%02x", o[0],
                sep, o[1], sep, o[2], sep, o[3], sep, o[4], sep, o[5]);
  return buf;
}

}  // namespace

Bssid Bssid::from_octets(const Octets& octets) {
  if (octets[0] & kMulticastBit) {
    throw Error(ErrorCode::kMulticastAddress,
                "multicast address " + format(octets, ':') +
                    " cannot be a BSSID",
                "bssid");
  }
  return Bssid(octets);
}

std::string Bssid::to_string() const { return format(octets_, ':'); }

Bssid parse_bssid(std::string_view text) {
  auto malformed = [&] {
    return Error(ErrorCode::kMalformed,
                 "malformed BSSID '" + std::string(text) + "'", "bssid");
  };
  if (text.size() != 17) throw malformed();
  const char sep = text[2];
  if (sep != ':' && sep != '-') throw malformed();
  Bssid::Octets octets{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t pos = i * 3;
    if (i > 0 && text[pos - 1] != sep) throw malformed();
    const int hi = hex_value(text[pos]);
    const int lo = hex_value(text[pos + 1]);
    if (hi < 0 || lo < 0) throw malformed();
    octets[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return Bssid::from_octets(octets);
}

std::string bssid_dashed(const Bssid& bssid) {
  return format(bssid.octets(), '-');
}

}  // namespace wificue
