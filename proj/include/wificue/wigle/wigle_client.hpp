#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "wificue/core/observation.hpp"

namespace wificue::wigle {

struct WigleDetail {
  Bssid netid = Bssid::from_octets({});
  std::string ssid;
  std::string encryption;
  double trilat = 0.0;
  double trilong = 0.0;
  std::optional<Timestamp> lastupdt;
  std::string raw;  // response body as received

  bool operator==(const WigleDetail&) const = default;
};

enum class WigleStatus {
  kUnknownToWigle,
  kConsistent,
  kSsidMismatch,
  kSecurityMismatch,
  kLocationMismatch,
};
std::string_view to_string(WigleStatus status);

struct WigleFinding {
  WigleStatus status = WigleStatus::kUnknownToWigle;
  std::optional<WigleDetail> detail;  // absent iff UNKNOWN_TO_WIGLE
  std::optional<double> distance_km;
};

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kLocationMismatchKm = 1.0;

double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Whether WIGLE's `encryption` string can describe an AP of class
// `observed`. Strings are first read with the capability-token classifier,
// then with WIGLE's lower-case vocabulary (none, wep, wpa, wpa2, wpa3, owe).
// Anything unrecognized, on either side, is treated as compatible.
bool encryption_compatible(std::string_view wigle_encryption,
                           SecurityClass observed);

// Checks SSID, then security, then location (only when the observation has
// one; mismatch beyond 1 km). The first failing check decides the status.
WigleFinding compare(const std::optional<WigleDetail>& detail,
                     const AccessPointObservation& obs);

// Decodes a network/detail response body. Returns nullopt when WIGLE has no
// record for `bssid`. Throws Error with kAuthFailed, kQuotaExceeded,
// kNetworkError or kMalformedResponse.
std::optional<WigleDetail> decode_detail_response(int http_status,
                                                  std::string_view body,
                                                  const Bssid& bssid);

struct HttpResult {
  int status = 0;
  std::string body;
};

// Fetches the raw detail document for a BSSID. Throws Error(kNetworkError)
// on transport failure.
class WigleTransport {
 public:
  virtual ~WigleTransport() = default;
  virtual HttpResult get_detail(const Bssid& bssid) = 0;
};

// GET https://api.wigle.net/api/v2/network/detail?netid=<BSSID> with HTTP
// basic auth.
class HttpsWigleTransport : public WigleTransport {
 public:
  HttpsWigleTransport(std::string api_name, std::string api_token,
                      std::string host = "api.wigle.net", int port = 443);
  HttpResult get_detail(const Bssid& bssid) override;

 private:
  std::string api_name_;
  std::string api_token_;
  std::string host_;
  int port_;
};

enum class WigleMode { kLive, kFixture };

struct WigleClientConfig {
  WigleMode mode = WigleMode::kFixture;
  // FIXTURE mode: files named "<bssid-with-dashes>.json" holding verbatim
  // response bodies.
  std::filesystem::path fixture_dir;
  // LIVE mode cache file; empty keeps the cache in memory only.
  std::filesystem::path cache_path;
  std::chrono::seconds ttl = std::chrono::hours(24);
};

// Looks up BSSIDs against WIGLE. In LIVE mode results (including "not
// found") are cached for `ttl`, and concurrent lookups of the same BSSID
// share one request. FIXTURE mode reads local files and never touches the
// transport.
class WigleClient {
 public:
  using Clock = std::function<Timestamp()>;

  WigleClient(WigleClientConfig config,
              std::shared_ptr<WigleTransport> transport, Clock clock = now_utc);

  std::optional<WigleDetail> lookup(const Bssid& bssid);
  // Answer without any network call: the fixture in FIXTURE mode, a fresh
  // cache entry in LIVE mode. The outer nullopt means nothing is known.
  std::optional<std::optional<WigleDetail>> peek(const Bssid& bssid);
  WigleMode mode() const { return config_.mode; }

 private:
  struct CacheEntry {
    Timestamp fetched_at{};
    std::optional<std::string> body;  // nullopt = WIGLE has no record
  };

  std::optional<WigleDetail> lookup_fixture(const Bssid& bssid) const;
  std::optional<WigleDetail> lookup_live(const Bssid& bssid);
  void load_cache();
  void save_cache() const;

  WigleClientConfig config_;
  std::shared_ptr<WigleTransport> transport_;
  Clock clock_;

  std::mutex mutex_;
  std::map<Bssid, CacheEntry> cache_;
  std::map<Bssid, std::shared_future<std::optional<WigleDetail>>> in_flight_;
};

}  // namespace wificue::wigle
