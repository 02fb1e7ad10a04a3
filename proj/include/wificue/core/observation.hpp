#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wificue/core/bssid.hpp"
#include "wificue/core/security.hpp"
#include "wificue/core/ssid.hpp"
#include "wificue/core/time.hpp"

namespace wificue {

// Insertion-ordered JSON; every document this project writes goes through it
// so field order is stable.
using Json = nlohmann::ordered_json;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  double accuracy_m = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

// One sighting of an access point.
struct AccessPointObservation {
  Bssid bssid = Bssid::from_octets({});
  Ssid ssid;
  std::string capabilities;
  SecurityInfo security;  // derived from capabilities
  int channel = 0;        // 0 = unknown
  int frequency_mhz = 0;
  int rssi_dbm = -100;
  Timestamp observed_at{};
  std::string scanner_id;
  std::optional<GeoPoint> location;

  bool operator==(const AccessPointObservation&) const = default;
};

inline constexpr int kMinRssiDbm = -120;
inline constexpr int kMaxRssiDbm = 0;

// Checks field invariants. When `ingest_time` is given, an observation more
// than 24 h ahead of it is rejected. Throws Error(kSchemaViolation).
void validate_observation(const AccessPointObservation& obs,
                          std::optional<Timestamp> ingest_time = std::nullopt);

// Canonical line format: one compact JSON object with the fields
//   observed_at, scanner_id, bssid, ssid_b64, capabilities, channel,
//   frequency_mhz, rssi_dbm[, lat, lon, accuracy_m]
// in exactly that order. No trailing newline.
Json observation_to_json(const AccessPointObservation& obs);
std::string encode_observation(const AccessPointObservation& obs);

// Strict: unknown or missing fields, wrong types and out-of-range values are
// rejected with Error(kSchemaViolation) naming the field. `line` is carried
// into the error.
AccessPointObservation observation_from_json(
    const Json& j, std::size_t line = 0,
    std::optional<Timestamp> ingest_time = std::nullopt);
AccessPointObservation decode_observation(
    std::string_view text, std::size_t line = 0,
    std::optional<Timestamp> ingest_time = std::nullopt);

}  // namespace wificue
