#include "wificue/probe/probe.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"
#include "wificue/core/rule_table.hpp"

namespace wificue::probe {
namespace {

[[noreturn]] void violation(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kSchemaViolation, "field '" + field + "': " + why, field);
}

void require_fields(const Json& j, const std::string& where,
                    std::initializer_list<std::string_view> required,
                    std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) violation(where, "expected an object");
  for (auto f : required) {
    if (!j.contains(std::string(f))) violation(std::string(f), "missing");
  }
  for (const auto& [key, value] : j.items()) {
    const bool known =
        std::find(required.begin(), required.end(), key) != required.end() ||
        std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) violation(key, "unknown field");
  }
}

std::string get_string(const Json& j, const std::string& field) {
  if (!j.at(field).is_string()) violation(field, "expected a string");
  return j[field].get<std::string>();
}

Timestamp get_time(const Json& j, const std::string& field) {
  auto t = try_parse_rfc3339(get_string(j, field));
  if (!t) violation(field, "not an RFC 3339 timestamp");
  return *t;
}

int get_port(const Json& j) {
  if (!j.at("port").is_number_integer()) violation("port", "expected an integer");
  const auto port = j["port"].get<std::int64_t>();
  if (port < 1 || port > 65535) violation("port", "out of range");
  return static_cast<int>(port);
}

const Json& get_array(const Json& j, const std::string& field) {
  if (!j.at(field).is_array()) violation(field, "expected an array");
  return j[field];
}

template <typename Enum, std::size_t N>
Enum enum_from(const Json& j, const std::string& field,
               const std::array<Enum, N>& values) {
  const auto name = get_string(j, field);
  for (auto v : values) {
    if (to_string(v) == name) return v;
  }
  violation(field, "unknown value '" + name + "'");
}

Json string_array(const std::set<std::string>& values) {
  Json a = Json::array();
  for (const auto& v : values) a.push_back(v);
  return a;
}

std::string join_keys(const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += ",";
    out += k;
  }
  return out;
}

}  // namespace

std::optional<std::string> canonical_ip(std::string_view text) {
  const std::string s(text);
  char buf[INET6_ADDRSTRLEN];
  in_addr v4{};
  if (inet_pton(AF_INET, s.c_str(), &v4) == 1) {
    return std::string(inet_ntop(AF_INET, &v4, buf, sizeof buf));
  }
  in6_addr v6{};
  if (inet_pton(AF_INET6, s.c_str(), &v6) == 1) {
    return std::string(inet_ntop(AF_INET6, &v6, buf, sizeof buf));
  }
  return std::nullopt;
}

std::string_view to_string(DnsVerdict v) {
  switch (v) {
    case DnsVerdict::kMatch: return "MATCH";
    case DnsVerdict::kPartial: return "PARTIAL";
    case DnsVerdict::kMismatch: return "MISMATCH";
    case DnsVerdict::kResolveFailed: return "RESOLVE_FAILED";
  }
  return "";
}

std::string_view to_string(TlsVerdict v) {
  switch (v) {
    case TlsVerdict::kPinOk: return "PIN_OK";
    case TlsVerdict::kPinMismatch: return "PIN_MISMATCH";
    case TlsVerdict::kConnectFailed: return "CONNECT_FAILED";
  }
  return "";
}

std::string_view to_string(PortalVerdict v) {
  switch (v) {
    case PortalVerdict::kNoPortal: return "NO_PORTAL";
    case PortalVerdict::kPortalDetected: return "PORTAL_DETECTED";
    case PortalVerdict::kUnreachable: return "UNREACHABLE";
  }
  return "";
}

DnsBaseline dns_baseline_from_json(const Json& j) {
  require_fields(j, "dns_baseline", {"entries", "fetched_at", "source"});
  DnsBaseline b;
  b.fetched_at = get_time(j, "fetched_at");
  b.source = get_string(j, "source");
  for (const auto& e : get_array(j, "entries")) {
    require_fields(e, "entries", {"domain", "expected_addresses"});
    DnsBaselineEntry entry{get_string(e, "domain"), {}};
    if (entry.domain.empty()) violation("domain", "empty");
    for (const auto& a : get_array(e, "expected_addresses")) {
      auto ip = a.is_string() ? canonical_ip(a.get<std::string>()) : std::nullopt;
      if (!ip) violation("expected_addresses", "not an IP literal");
      entry.expected_addresses.insert(*ip);
    }
    if (entry.expected_addresses.empty()) {
      violation("expected_addresses", "empty for " + entry.domain);
    }
    for (const auto& prior : b.entries) {
      if (prior.domain == entry.domain) violation("domain", "duplicate " + entry.domain);
    }
    b.entries.push_back(std::move(entry));
  }
  if (b.entries.empty()) violation("entries", "at least one entry required");
  return b;
}

TlsPinSet tls_pins_from_json(const Json& j) {
  require_fields(j, "tls_pins", {"entries", "fetched_at"});
  TlsPinSet p;
  p.fetched_at = get_time(j, "fetched_at");
  for (const auto& e : get_array(j, "entries")) {
    require_fields(e, "entries", {"host", "port", "spki_sha256_b64"});
    TlsPinEntry entry{get_string(e, "host"), get_port(e), {}};
    if (entry.host.empty()) violation("host", "empty");
    for (const auto& pin : get_array(e, "spki_sha256_b64")) {
      const auto raw = pin.is_string() ? base64_decode(pin.get<std::string>())
                                       : std::nullopt;
      if (!raw || raw->size() != 32) {
        violation("spki_sha256_b64", "pin must be base64 of 32 bytes");
      }
      entry.spki_sha256_b64.insert(pin.get<std::string>());
    }
    if (entry.spki_sha256_b64.empty()) {
      violation("spki_sha256_b64", "empty for " + entry.host);
    }
    for (const auto& prior : p.entries) {
      if (prior.host == entry.host && prior.port == entry.port) {
        violation("host", "duplicate " + entry.host);
      }
    }
    p.entries.push_back(std::move(entry));
  }
  if (p.entries.empty()) violation("entries", "at least one entry required");
  return p;
}

Json to_json(const DnsBaseline& baseline) {
  Json entries = Json::array();
  for (const auto& e : baseline.entries) {
    Json je;
    je["domain"] = e.domain;
    je["expected_addresses"] = string_array(e.expected_addresses);
    entries.push_back(std::move(je));
  }
  Json j;
  j["entries"] = std::move(entries);
  j["fetched_at"] = format_rfc3339(baseline.fetched_at);
  j["source"] = baseline.source;
  return j;
}

Json to_json(const TlsPinSet& pins) {
  Json entries = Json::array();
  for (const auto& e : pins.entries) {
    Json je;
    je["host"] = e.host;
    je["port"] = e.port;
    je["spki_sha256_b64"] = string_array(e.spki_sha256_b64);
    entries.push_back(std::move(je));
  }
  Json j;
  j["entries"] = std::move(entries);
  j["fetched_at"] = format_rfc3339(pins.fetched_at);
  return j;
}

Json to_json(const ProbeResult& result) {
  Json j;
  j["bssid"] = result.bssid.to_string();
  j["started_at"] = format_rfc3339(result.started_at);
  Json dns = Json::array();
  for (const auto& d : result.dns) {
    Json jd;
    jd["domain"] = d.domain;
    jd["resolved"] = string_array(d.resolved);
    jd["verdict"] = to_string(d.verdict);
    dns.push_back(std::move(jd));
  }
  j["dns"] = std::move(dns);
  Json tls = Json::array();
  for (const auto& t : result.tls) {
    Json jt;
    jt["host"] = t.host;
    jt["port"] = t.port;
    jt["verdict"] = to_string(t.verdict);
    tls.push_back(std::move(jt));
  }
  j["tls"] = std::move(tls);
  j["portal"] = Json{{"verdict", to_string(result.portal.verdict)}};
  return j;
}

ProbeResult probe_result_from_json(const Json& j) {
  require_fields(j, "probe", {"bssid", "started_at", "dns", "tls", "portal"});
  ProbeResult r;
  try {
    r.bssid = parse_bssid(get_string(j, "bssid"));
  } catch (const Error& e) {
    violation("bssid", e.what());
  }
  r.started_at = get_time(j, "started_at");
  static constexpr std::array kDns = {DnsVerdict::kMatch, DnsVerdict::kPartial,
                                      DnsVerdict::kMismatch,
                                      DnsVerdict::kResolveFailed};
  static constexpr std::array kTls = {TlsVerdict::kPinOk, TlsVerdict::kPinMismatch,
                                      TlsVerdict::kConnectFailed};
  static constexpr std::array kPortal = {PortalVerdict::kNoPortal,
                                         PortalVerdict::kPortalDetected,
                                         PortalVerdict::kUnreachable};
  for (const auto& d : get_array(j, "dns")) {
    require_fields(d, "dns", {"domain", "resolved", "verdict"});
    DnsCheck check{get_string(d, "domain"), {}, enum_from(d, "verdict", kDns)};
    for (const auto& a : get_array(d, "resolved")) {
      if (!a.is_string()) violation("resolved", "expected strings");
      check.resolved.insert(a.get<std::string>());
    }
    for (const auto& prior : r.dns) {
      if (prior.domain == check.domain) violation("dns", "duplicate " + check.domain);
    }
    r.dns.push_back(std::move(check));
  }
  for (const auto& t : get_array(j, "tls")) {
    require_fields(t, "tls", {"host", "port", "verdict"});
    TlsCheck check{get_string(t, "host"), get_port(t), enum_from(t, "verdict", kTls)};
    for (const auto& prior : r.tls) {
      if (prior.host == check.host && prior.port == check.port) {
        violation("tls", "duplicate " + check.host);
      }
    }
    r.tls.push_back(std::move(check));
  }
  require_fields(j["portal"], "portal", {"verdict"});
  r.portal.verdict = enum_from(j["portal"], "verdict", kPortal);
  return r;
}

void check_coverage(const ProbeResult& result, const DnsBaseline* dns,
                    const TlsPinSet* tls) {
  if (dns) {
    if (result.dns.size() != dns->entries.size()) {
      violation("dns", "does not cover the DNS baseline exactly once");
    }
    for (const auto& e : dns->entries) {
      const auto n = std::count_if(result.dns.begin(), result.dns.end(),
                                   [&](const auto& c) { return c.domain == e.domain; });
      if (n != 1) violation("dns", "baseline domain " + e.domain + " missing");
    }
  }
  if (tls) {
    if (result.tls.size() != tls->entries.size()) {
      violation("tls", "does not cover the TLS pin set exactly once");
    }
    for (const auto& e : tls->entries) {
      const auto n = std::count_if(result.tls.begin(), result.tls.end(), [&](const auto& c) {
        return c.host == e.host && c.port == e.port;
      });
      if (n != 1) violation("tls", "pinned host " + e.host + " missing");
    }
  }
}

std::vector<DnsCheck> check_dns(Resolver& resolver, const DnsBaseline& baseline) {
  std::vector<DnsCheck> out;
  out.reserve(baseline.entries.size());
  for (const auto& entry : baseline.entries) {
    DnsCheck check{entry.domain, {}, DnsVerdict::kResolveFailed};
    try {
      for (const auto& addr : resolver.resolve(entry.domain)) {
        check.resolved.insert(canonical_ip(addr).value_or(addr));
      }
    } catch (...) {
      check.resolved.clear();
    }
    if (!check.resolved.empty()) {
      const auto hits = std::count_if(
          check.resolved.begin(), check.resolved.end(),
          [&](const auto& a) { return entry.expected_addresses.count(a) > 0; });
      if (static_cast<std::size_t>(hits) == check.resolved.size()) {
        check.verdict = DnsVerdict::kMatch;
      } else if (hits > 0) {
        check.verdict = DnsVerdict::kPartial;
      } else {
        check.verdict = DnsVerdict::kMismatch;
      }
    }
    out.push_back(std::move(check));
  }
  return out;
}

std::vector<TlsCheck> check_tls(TlsConnector& connector, const TlsPinSet& pins) {
  std::vector<TlsCheck> out;
  out.reserve(pins.entries.size());
  for (const auto& entry : pins.entries) {
    TlsCheck check{entry.host, entry.port, TlsVerdict::kConnectFailed};
    try {
      const auto digest = connector.spki_sha256_b64(entry.host, entry.port);
      check.verdict = entry.spki_sha256_b64.count(digest) ? TlsVerdict::kPinOk
                                                          : TlsVerdict::kPinMismatch;
    } catch (...) {
    }
    out.push_back(std::move(check));
  }
  return out;
}

PortalCheck check_portal(HttpFetcher& fetcher, const std::string& probe_url,
                         int expected_status, const std::string& expected_body) {
  try {
    const auto response = fetcher.get(probe_url);
    if (response.status == expected_status && response.body == expected_body) {
      return {PortalVerdict::kNoPortal};
    }
    return {PortalVerdict::kPortalDetected};
  } catch (...) {
    return {PortalVerdict::kUnreachable};
  }
}

ProbeResult run_probe(const Bssid& bssid, Timestamp started_at,
                      const ProbeTargets& targets, Resolver& resolver,
                      TlsConnector& connector, HttpFetcher& fetcher) {
  ProbeResult r;
  r.bssid = bssid;
  r.started_at = started_at;
  if (targets.dns) r.dns = check_dns(resolver, *targets.dns);
  if (targets.tls) r.tls = check_tls(connector, *targets.tls);
  r.portal = check_portal(fetcher, targets.portal_url, targets.portal_status,
                          targets.portal_body);
  return r;
}

std::vector<Flag> probe_flags(const ProbeResult& result) {
  std::vector<std::string> mismatched, partial, pin_mismatch;
  std::size_t failed = 0;
  for (const auto& d : result.dns) {
    if (d.verdict == DnsVerdict::kMismatch) mismatched.push_back(d.domain);
    if (d.verdict == DnsVerdict::kPartial) partial.push_back(d.domain);
    if (d.verdict == DnsVerdict::kResolveFailed) ++failed;
  }
  for (const auto& t : result.tls) {
    if (t.verdict == TlsVerdict::kPinMismatch) {
      pin_mismatch.push_back(t.host + ":" + std::to_string(t.port));
    }
    if (t.verdict == TlsVerdict::kConnectFailed) ++failed;
  }
  if (result.portal.verdict == PortalVerdict::kUnreachable) ++failed;
  const std::size_t total = result.dns.size() + result.tls.size() + 1;

  std::vector<Flag> flags;
  if (!mismatched.empty()) {
    flags.push_back(make_flag("PROBE_DNS_TAMPER", {{"domains", join_keys(mismatched)}}));
  }
  if (!pin_mismatch.empty()) {
    flags.push_back(make_flag("PROBE_TLS_TAMPER", {{"hosts", join_keys(pin_mismatch)}}));
  }
  if (result.portal.verdict == PortalVerdict::kPortalDetected) {
    flags.push_back(make_flag("PROBE_PORTAL", {{"portal", "PORTAL_DETECTED"}}));
  }
  if (failed == total) {
    flags.push_back(make_flag("PROBE_NO_INTERNET",
                              {{"failed_checks", std::to_string(failed)}}));
  }
  if (!partial.empty()) {
    flags.push_back(make_flag("PROBE_DNS_DRIFT", {{"domains", join_keys(partial)}}));
  }
  sort_flags(flags);
  return flags;
}

}  // namespace wificue::probe
