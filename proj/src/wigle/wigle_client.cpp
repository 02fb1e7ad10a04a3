#include "wificue/wigle/wigle_client.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <httplib.h>

#include "wificue/core/error.hpp"

namespace wificue::wigle {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

std::optional<Timestamp> parse_wigle_time(const Json& v) {
  if (!v.is_string()) return std::nullopt;
  const auto& s = v.get_ref<const std::string&>();
  if (auto t = try_parse_rfc3339(s)) return t;
  try {
    return parse_naive_utc(s.substr(0, 19));
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(WigleStatus status) {
  switch (status) {
    case WigleStatus::kUnknownToWigle: return "UNKNOWN_TO_WIGLE";
    case WigleStatus::kConsistent: return "CONSISTENT";
    case WigleStatus::kSsidMismatch: return "SSID_MISMATCH";
    case WigleStatus::kSecurityMismatch: return "SECURITY_MISMATCH";
    case WigleStatus::kLocationMismatch: return "LOCATION_MISMATCH";
  }
  return "UNKNOWN";
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * kRad;
  const double dlon = (lon2 - lon1) * kRad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kRad) * std::cos(lat2 * kRad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

bool encryption_compatible(std::string_view wigle_encryption,
                           SecurityClass observed) {
  if (observed == SecurityClass::kUnknown) return true;
  const auto token = classify_security(wigle_encryption);
  if (token.security != SecurityClass::kUnknown) {
    return token.security == observed;
  }
  const std::string enc = lower(wigle_encryption);
  using S = SecurityClass;
  if (enc == "none" || enc == "open" || enc == "off") return observed == S::kOpen;
  if (enc == "wep") return observed == S::kWep;
  if (enc == "wpa") return observed == S::kWpaTkip;
  if (enc == "wpa2") return observed == S::kWpa2Psk || observed == S::kWpa2Enterprise;
  if (enc == "wpa3") return observed == S::kWpa3Sae || observed == S::kWpa3Enterprise;
  if (enc == "owe") return observed == S::kOwe;
  return true;
}

WigleFinding compare(const std::optional<WigleDetail>& detail,
                     const AccessPointObservation& obs) {
  if (!detail) return {};
  WigleFinding f{WigleStatus::kConsistent, detail, std::nullopt};
  if (!detail->ssid.empty() && !obs.ssid.hidden() &&
      detail->ssid != obs.ssid.bytes()) {
    f.status = WigleStatus::kSsidMismatch;
    return f;
  }
  if (!encryption_compatible(detail->encryption, obs.security.security)) {
    f.status = WigleStatus::kSecurityMismatch;
    return f;
  }
  if (obs.location) {
    f.distance_km = haversine_km(detail->trilat, detail->trilong,
                                 obs.location->lat, obs.location->lon);
    if (*f.distance_km > kLocationMismatchKm) {
      f.status = WigleStatus::kLocationMismatch;
    }
  }
  return f;
}

std::optional<WigleDetail> decode_detail_response(int http_status,
                                                  std::string_view body,
                                                  const Bssid& bssid) {
  if (http_status == 401 || http_status == 403) {
    throw Error(ErrorCode::kAuthFailed, "WIGLE rejected the API credentials");
  }
  if (http_status == 429) {
    throw Error(ErrorCode::kQuotaExceeded, "WIGLE query quota exceeded");
  }
  if (http_status == 404) return std::nullopt;
  if (http_status != 200) {
    throw Error(ErrorCode::kNetworkError,
                "WIGLE answered HTTP " + std::to_string(http_status));
  }
  const Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kMalformedResponse, "WIGLE response is not a JSON object");
  }
  if (doc.contains("success") && doc["success"] == false) {
    const std::string message =
        lower(doc.value("message", doc.value("error", std::string())));
    if (contains(message, "too many") || contains(message, "quota") ||
        contains(message, "limit")) {
      throw Error(ErrorCode::kQuotaExceeded, "WIGLE: " + message);
    }
    if (contains(message, "auth") || contains(message, "credential") ||
        contains(message, "login")) {
      throw Error(ErrorCode::kAuthFailed, "WIGLE: " + message);
    }
    if (contains(message, "not found") || contains(message, "no result")) {
      return std::nullopt;
    }
    throw Error(ErrorCode::kMalformedResponse, "WIGLE error: " + message);
  }
  const auto results = doc.find("results");
  if (results == doc.end() || !results->is_array()) {
    throw Error(ErrorCode::kMalformedResponse, "WIGLE response has no results array");
  }
  for (const auto& r : *results) {
    if (!r.is_object() || !r.contains("netid") || !r["netid"].is_string()) {
      throw Error(ErrorCode::kMalformedResponse, "WIGLE result without netid");
    }
    Bssid netid = Bssid::from_octets({});
    try {
      netid = parse_bssid(r["netid"].get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedResponse,
                  std::string("WIGLE netid unparseable: ") + e.what());
    }
    if (netid != bssid) continue;
    if (!r.contains("trilat") || !r["trilat"].is_number() ||
        !r.contains("trilong") || !r["trilong"].is_number()) {
      throw Error(ErrorCode::kMalformedResponse, "WIGLE result without trilat/trilong");
    }
    WigleDetail d;
    d.netid = netid;
    d.ssid = r.contains("ssid") && r["ssid"].is_string() ? r["ssid"].get<std::string>() : "";
    d.encryption = r.contains("encryption") && r["encryption"].is_string()
                       ? r["encryption"].get<std::string>()
                       : "unknown";
    d.trilat = r["trilat"].get<double>();
    d.trilong = r["trilong"].get<double>();
    if (r.contains("lastupdt")) d.lastupdt = parse_wigle_time(r["lastupdt"]);
    d.raw = std::string(body);
    return d;
  }
  return std::nullopt;
}

HttpsWigleTransport::HttpsWigleTransport(std::string api_name,
                                         std::string api_token,
                                         std::string host, int port)
    : api_name_(std::move(api_name)),
      api_token_(std::move(api_token)),
      host_(std::move(host)),
      port_(port) {}

HttpResult HttpsWigleTransport::get_detail(const Bssid& bssid) {
  httplib::SSLClient client(host_, port_);
  client.set_basic_auth(api_name_, api_token_);
  client.set_connection_timeout(10);
  client.set_read_timeout(20);
  client.enable_server_certificate_verification(true);
  auto netid = bssid.to_string();
  for (auto& c : netid) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  auto res = client.Get("/api/v2/network/detail?netid=" + httplib::detail::encode_url(netid));
  if (!res) {
    throw Error(ErrorCode::kNetworkError,
                "WIGLE request failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

WigleClient::WigleClient(WigleClientConfig config,
                         std::shared_ptr<WigleTransport> transport, Clock clock)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      clock_(std::move(clock)) {
  if (config_.mode == WigleMode::kLive) load_cache();
}

std::optional<WigleDetail> WigleClient::lookup(const Bssid& bssid) {
  return config_.mode == WigleMode::kFixture ? lookup_fixture(bssid)
                                             : lookup_live(bssid);
}

std::optional<std::optional<WigleDetail>> WigleClient::peek(const Bssid& bssid) {
  if (config_.mode == WigleMode::kFixture) {
    return std::optional<std::optional<WigleDetail>>(lookup_fixture(bssid));
  }
  std::lock_guard lock(mutex_);
  auto it = cache_.find(bssid);
  if (it == cache_.end() || clock_() - it->second.fetched_at >= config_.ttl) {
    return std::nullopt;
  }
  if (!it->second.body) return std::optional<WigleDetail>();
  return decode_detail_response(200, *it->second.body, bssid);
}

std::optional<WigleDetail> WigleClient::lookup_fixture(const Bssid& bssid) const {
  const auto file = config_.fixture_dir / (bssid_dashed(bssid) + ".json");
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_detail_response(200, ss.str(), bssid);
}

std::optional<WigleDetail> WigleClient::lookup_live(const Bssid& bssid) {
  std::promise<std::optional<WigleDetail>> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = cache_.find(bssid); it != cache_.end()) {
      if (clock_() - it->second.fetched_at < config_.ttl) {
        if (!it->second.body) return std::nullopt;
        return decode_detail_response(200, *it->second.body, bssid);
      }
    }
    if (auto it = in_flight_.find(bssid); it != in_flight_.end()) {
      auto shared = it->second;
      lock.unlock();
      return shared.get();
    }
    in_flight_.emplace(bssid, promise.get_future().share());
  }

  std::optional<WigleDetail> result;
  try {
    if (!transport_) {
      throw Error(ErrorCode::kNetworkError, "no WIGLE transport configured");
    }
    const auto response = transport_->get_detail(bssid);
    result = decode_detail_response(response.status, response.body, bssid);
    std::lock_guard lock(mutex_);
    cache_[bssid] = CacheEntry{
        clock_(), result ? std::optional<std::string>(response.body) : std::nullopt};
    in_flight_.erase(bssid);
    save_cache();
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    in_flight_.erase(bssid);
    throw;
  }
  promise.set_value(result);
  return result;
}

void WigleClient::load_cache() {
  if (config_.cache_path.empty()) return;
  std::ifstream in(config_.cache_path);
  if (!in) return;
  const Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("entries")) return;
  for (const auto& e : doc["entries"]) {
    try {
      CacheEntry entry{parse_rfc3339(e.at("fetched_at").get<std::string>()),
                       std::nullopt};
      if (e.at("body").is_string()) entry.body = e["body"].get<std::string>();
      cache_[parse_bssid(e.at("bssid").get<std::string>())] = std::move(entry);
    } catch (const std::exception&) {
      // A damaged entry only costs a refetch.
    }
  }
}

void WigleClient::save_cache() const {
  if (config_.cache_path.empty()) return;
  Json entries = Json::array();
  for (const auto& [bssid, entry] : cache_) {
    Json e;
    e["bssid"] = bssid.to_string();
    e["fetched_at"] = format_rfc3339(entry.fetched_at);
    e["body"] = entry.body ? Json(*entry.body) : Json(nullptr);
    entries.push_back(std::move(e));
  }
  Json doc;
  doc["entries"] = std::move(entries);
  const auto tmp = config_.cache_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump() << '\n';
    if (!out) return;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, config_.cache_path, ec);
}

}  // namespace wificue::wigle
