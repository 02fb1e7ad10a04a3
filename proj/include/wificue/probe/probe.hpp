#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wificue/core/flag.hpp"
#include "wificue/core/observation.hpp"

namespace wificue::probe {

// Printed by every front end before a post-connection probe runs.
inline constexpr std::string_view kProbeWarning =
    "WARNING: post-connection checks require joining the access point first. "
    "A hostile AP can attack your device as soon as you connect, before any "
    "check completes. Only continue if you accept that risk.";

struct DnsBaselineEntry {
  std::string domain;
  std::set<std::string> expected_addresses;  // canonical IP literals
};

struct DnsBaseline {
  std::vector<DnsBaselineEntry> entries;
  Timestamp fetched_at{};
  std::string source;
};

struct TlsPinEntry {
  std::string host;
  int port = 443;
  std::set<std::string> spki_sha256_b64;
};

struct TlsPinSet {
  std::vector<TlsPinEntry> entries;
  Timestamp fetched_at{};
};

// Parse and validate baseline documents. Throws Error(kSchemaViolation).
DnsBaseline dns_baseline_from_json(const Json& j);
TlsPinSet tls_pins_from_json(const Json& j);
Json to_json(const DnsBaseline& baseline);
Json to_json(const TlsPinSet& pins);

// inet_pton/inet_ntop round trip; nullopt when `text` is not an IP literal.
std::optional<std::string> canonical_ip(std::string_view text);

enum class DnsVerdict { kMatch, kPartial, kMismatch, kResolveFailed };
enum class TlsVerdict { kPinOk, kPinMismatch, kConnectFailed };
enum class PortalVerdict { kNoPortal, kPortalDetected, kUnreachable };

std::string_view to_string(DnsVerdict v);
std::string_view to_string(TlsVerdict v);
std::string_view to_string(PortalVerdict v);

struct DnsCheck {
  std::string domain;
  std::set<std::string> resolved;
  DnsVerdict verdict = DnsVerdict::kResolveFailed;
  bool operator==(const DnsCheck&) const = default;
};

struct TlsCheck {
  std::string host;
  int port = 443;
  TlsVerdict verdict = TlsVerdict::kConnectFailed;
  bool operator==(const TlsCheck&) const = default;
};

struct PortalCheck {
  PortalVerdict verdict = PortalVerdict::kUnreachable;
  bool operator==(const PortalCheck&) const = default;
};

struct ProbeResult {
  Bssid bssid = Bssid::from_octets({});
  Timestamp started_at{};
  std::vector<DnsCheck> dns;  // baseline entry order
  std::vector<TlsCheck> tls;
  PortalCheck portal;
  bool operator==(const ProbeResult&) const = default;
};

Json to_json(const ProbeResult& result);
// Throws Error(kSchemaViolation), including for duplicate domains or hosts.
ProbeResult probe_result_from_json(const Json& j);

// Confirms every baseline entry appears exactly once in `result`. Throws
// Error(kSchemaViolation).
void check_coverage(const ProbeResult& result, const DnsBaseline* dns,
                    const TlsPinSet* tls);

// Transports. Any exception thrown by a transport is a failed check, never
// a failed probe.
class Resolver {
 public:
  virtual ~Resolver() = default;
  virtual std::vector<std::string> resolve(const std::string& domain) = 0;
};

class TlsConnector {
 public:
  virtual ~TlsConnector() = default;
  // Base64 SHA-256 of the leaf certificate's SubjectPublicKeyInfo.
  virtual std::string spki_sha256_b64(const std::string& host, int port) = 0;
};

struct FetchResponse {
  int status = 0;
  std::string body;
};

class HttpFetcher {
 public:
  virtual ~HttpFetcher() = default;
  // Must not follow redirects.
  virtual FetchResponse get(const std::string& url) = 0;
};

inline constexpr int kDefaultPortalStatus = 204;

// Per domain: resolved set within expected -> MATCH; overlapping -> PARTIAL;
// disjoint -> MISMATCH; resolver failure or empty answer -> RESOLVE_FAILED.
std::vector<DnsCheck> check_dns(Resolver& resolver, const DnsBaseline& baseline);
std::vector<TlsCheck> check_tls(TlsConnector& connector, const TlsPinSet& pins);
PortalCheck check_portal(HttpFetcher& fetcher, const std::string& probe_url,
                         int expected_status = kDefaultPortalStatus,
                         const std::string& expected_body = "");

struct ProbeTargets {
  const DnsBaseline* dns = nullptr;
  const TlsPinSet* tls = nullptr;
  std::string portal_url;
  int portal_status = kDefaultPortalStatus;
  std::string portal_body;
};

ProbeResult run_probe(const Bssid& bssid, Timestamp started_at,
                      const ProbeTargets& targets, Resolver& resolver,
                      TlsConnector& connector, HttpFetcher& fetcher);

// PROBE_DNS_TAMPER for any MISMATCH, PROBE_TLS_TAMPER for any PIN_MISMATCH,
// PROBE_PORTAL when a portal is detected, PROBE_DNS_DRIFT for any PARTIAL
// answer, PROBE_NO_INTERNET when every check failed to connect. Sorted.
std::vector<Flag> probe_flags(const ProbeResult& result);

}  // namespace wificue::probe
