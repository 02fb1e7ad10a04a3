#include "wificue/core/observation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"

namespace wificue {
namespace {

constexpr std::array<std::string_view, 11> kFields = {
    "observed_at",   "scanner_id", "bssid",    "ssid_b64",
    "capabilities",  "channel",    "frequency_mhz", "rssi_dbm",
    "lat",           "lon",        "accuracy_m"};
constexpr std::size_t kRequiredFields = 8;

[[noreturn]] void violation(std::string_view field, const std::string& why,
                            std::size_t line) {
  std::string msg = "field '" + std::string(field) + "': " + why;
  if (line > 0) msg = "line " + std::to_string(line) + ": " + msg;
  throw Error(ErrorCode::kSchemaViolation, msg, std::string(field), line);
}

const std::string& get_string(const Json& j, std::string_view field,
                              std::size_t line) {
  const auto& v = j.at(std::string(field));
  if (!v.is_string()) violation(field, "expected a string", line);
  return v.get_ref<const std::string&>();
}

int get_int(const Json& j, std::string_view field, std::size_t line) {
  const auto& v = j.at(std::string(field));
  if (!v.is_number_integer()) violation(field, "expected an integer", line);
  const auto n = v.get<std::int64_t>();
  if (n < -1'000'000 || n > 1'000'000) violation(field, "out of range", line);
  return static_cast<int>(n);
}

double get_number(const Json& j, std::string_view field, std::size_t line) {
  const auto& v = j.at(std::string(field));
  if (!v.is_number()) violation(field, "expected a number", line);
  return v.get<double>();
}

void check(const AccessPointObservation& obs,
           std::optional<Timestamp> ingest_time, std::size_t line) {
  if (obs.channel < 0) violation("channel", "must be >= 0", line);
  if (obs.frequency_mhz < 0) violation("frequency_mhz", "must be >= 0", line);
  if (obs.rssi_dbm < kMinRssiDbm || obs.rssi_dbm > kMaxRssiDbm) {
    violation("rssi_dbm", "must be within [-120, 0]", line);
  }
  if (obs.location) {
    const auto& loc = *obs.location;
    if (!(loc.lat >= -90.0 && loc.lat <= 90.0)) {
      violation("lat", "must be within [-90, 90]", line);
    }
    if (!(loc.lon >= -180.0 && loc.lon <= 180.0)) {
      violation("lon", "must be within [-180, 180]", line);
    }
    if (!(loc.accuracy_m >= 0.0) || !std::isfinite(loc.accuracy_m)) {
      violation("accuracy_m", "must be >= 0", line);
    }
  }
  if (ingest_time && obs.observed_at > *ingest_time + std::chrono::hours(24)) {
    violation("observed_at", "more than 24 h in the future", line);
  }
}

}  // namespace

void validate_observation(const AccessPointObservation& obs,
                          std::optional<Timestamp> ingest_time) {
  check(obs, ingest_time, 0);
}

Json observation_to_json(const AccessPointObservation& obs) {
  Json j;
  j["observed_at"] = format_rfc3339(obs.observed_at);
  j["scanner_id"] = obs.scanner_id;
  j["bssid"] = obs.bssid.to_string();
  j["ssid_b64"] = base64_encode(obs.ssid.bytes());
  j["capabilities"] = obs.capabilities;
  j["channel"] = obs.channel;
  j["frequency_mhz"] = obs.frequency_mhz;
  j["rssi_dbm"] = obs.rssi_dbm;
  if (obs.location) {
    j["lat"] = obs.location->lat;
    j["lon"] = obs.location->lon;
    j["accuracy_m"] = obs.location->accuracy_m;
  }
  return j;
}

std::string encode_observation(const AccessPointObservation& obs) {
  return observation_to_json(obs).dump();
}

AccessPointObservation observation_from_json(
    const Json& j, std::size_t line, std::optional<Timestamp> ingest_time) {
  if (!j.is_object()) violation("", "expected a JSON object", line);
  for (std::size_t i = 0; i < kRequiredFields; ++i) {
    if (!j.contains(std::string(kFields[i]))) {
      violation(kFields[i], "missing", line);
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
      violation(key, "unknown field", line);
    }
  }

  AccessPointObservation obs;
  if (auto t = try_parse_rfc3339(get_string(j, "observed_at", line))) {
    obs.observed_at = *t;
  } else {
    violation("observed_at", "not an RFC 3339 timestamp", line);
  }
  obs.scanner_id = get_string(j, "scanner_id", line);
  try {
    obs.bssid = parse_bssid(get_string(j, "bssid", line));
  } catch (const Error& e) {
    violation("bssid", e.what(), line);
  }
  auto ssid = base64_decode(get_string(j, "ssid_b64", line));
  if (!ssid) violation("ssid_b64", "invalid base64", line);
  if (ssid->size() > Ssid::kMaxBytes) {
    violation("ssid_b64", "SSID longer than 32 bytes", line);
  }
  obs.ssid = Ssid(std::move(*ssid));
  obs.capabilities = get_string(j, "capabilities", line);
  obs.security = classify_security(obs.capabilities);
  obs.channel = get_int(j, "channel", line);
  obs.frequency_mhz = get_int(j, "frequency_mhz", line);
  obs.rssi_dbm = get_int(j, "rssi_dbm", line);

  const bool has_lat = j.contains("lat");
  const bool has_lon = j.contains("lon");
  const bool has_acc = j.contains("accuracy_m");
  if (has_lat || has_lon || has_acc) {
    if (!has_lat) violation("lat", "location requires lat, lon, accuracy_m", line);
    if (!has_lon) violation("lon", "location requires lat, lon, accuracy_m", line);
    if (!has_acc) {
      violation("accuracy_m", "location requires lat, lon, accuracy_m", line);
    }
    obs.location = GeoPoint{get_number(j, "lat", line),
                            get_number(j, "lon", line),
                            get_number(j, "accuracy_m", line)};
  }
  check(obs, ingest_time, line);
  return obs;
}

AccessPointObservation decode_observation(std::string_view text,
                                          std::size_t line,
                                          std::optional<Timestamp> ingest_time) {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) violation("", "not valid JSON", line);
  return observation_from_json(j, line, ingest_time);
}

}  // namespace wificue
