#include <doctest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"
#include "wificue/core/rule_table.hpp"
#include "wificue/ingest/scan_ingest.hpp"
#include "wificue/risk/risk_engine.hpp"

using namespace wificue;
using namespace wificue::risk;
using L = FlagLevel;

namespace {

using Expected = std::vector<std::pair<std::string, L>>;

Expected as_pairs(const std::vector<Flag>& flags) {
  Expected out;
  for (const auto& f : flags) out.emplace_back(f.code, f.level);
  return out;
}

std::vector<std::string> codes(const std::vector<Flag>& flags) {
  std::vector<std::string> out;
  for (const auto& f : flags) out.push_back(f.code);
  return out;
}

AccessPointObservation obs(const char* bssid, const char* ssid, SecurityClass sc, bool wps = false,
                           const char* at = "2024-06-01T11:55:00Z", int channel = 6) {
  AccessPointObservation o;
  o.bssid = parse_bssid(bssid);
  o.ssid = Ssid(ssid);
  o.security = SecurityInfo{sc, wps};
  o.capabilities = "[synthetic]";
  o.channel = channel;
  o.frequency_mhz = 2437;
  o.rssi_dbm = -60;
  o.observed_at = parse_rfc3339(at);
  o.scanner_id = "s";
  return o;
}

ingest::ScanBatch batch(std::vector<AccessPointObservation> v) {
  ingest::ScanBatch b;
  b.observations = std::move(v);
  return ingest::normalize(b);
}

oui::OuiRegistry golden_registry() {
  std::istringstream in(testing::slurp(testing::fixture("golden/manuf")));
  return oui::load_registry(in, oui::LoadMode::kStrict, parse_rfc3339("2024-06-01T00:00:00Z"));
}

}  // namespace

TEST_CASE("protocol flags: 9 classes x wps") {
  // Oracle table, written out in full.
  const std::map<std::pair<SecurityClass, bool>, Expected> table = {
      {{SecurityClass::kWep, false}, {{"SEC_WEP", L::kCriticalNegative}}},
      {{SecurityClass::kWep, true}, {{"SEC_WEP", L::kCriticalNegative}, {"SEC_WPS", L::kNegative}}},
      {{SecurityClass::kOpen, false}, {{"SEC_OPEN", L::kNegative}}},
      {{SecurityClass::kOpen, true}, {{"SEC_OPEN", L::kNegative}, {"SEC_WPS", L::kNegative}}},
      {{SecurityClass::kWpaTkip, false}, {{"SEC_WPA_TKIP", L::kNegative}}},
      {{SecurityClass::kWpaTkip, true}, {{"SEC_WPA_TKIP", L::kNegative}, {"SEC_WPS", L::kNegative}}},
      {{SecurityClass::kWpa2Psk, false}, {{"SEC_WPA2_PSK", L::kPotentialNegative}}},
      {{SecurityClass::kWpa2Psk, true}, {{"SEC_WPS", L::kNegative}, {"SEC_WPA2_PSK", L::kPotentialNegative}}},
      {{SecurityClass::kWpa2Enterprise, false}, {{"SEC_WPA2_ENTERPRISE", L::kPotentialNegative}}},
      {{SecurityClass::kWpa2Enterprise, true}, {{"SEC_WPS", L::kNegative}, {"SEC_WPA2_ENTERPRISE", L::kPotentialNegative}}},
      {{SecurityClass::kWpa3Sae, false}, {{"SEC_WPA3_SAE", L::kPotentialNegative}}},
      {{SecurityClass::kWpa3Sae, true}, {{"SEC_WPS", L::kNegative}, {"SEC_WPA3_SAE", L::kPotentialNegative}}},
      {{SecurityClass::kWpa3Enterprise, false}, {{"SEC_WPA3_ENTERPRISE", L::kUndetermined}}},
      {{SecurityClass::kWpa3Enterprise, true}, {{"SEC_WPS", L::kNegative}, {"SEC_WPA3_ENTERPRISE", L::kUndetermined}}},
      {{SecurityClass::kOwe, false}, {{"SEC_OWE", L::kUndetermined}}},
      {{SecurityClass::kOwe, true}, {{"SEC_WPS", L::kNegative}, {"SEC_OWE", L::kUndetermined}}},
      {{SecurityClass::kUnknown, false}, {{"SEC_UNKNOWN", L::kUndetermined}}},
      {{SecurityClass::kUnknown, true}, {{"SEC_WPS", L::kNegative}, {"SEC_UNKNOWN", L::kUndetermined}}},
  };
  REQUIRE(table.size() == 18);
  for (const auto& [key, want] : table) {
    CAPTURE(to_string(key.first));
    CAPTURE(key.second);
    CHECK(as_pairs(protocol_flags(obs("00:00:0c:00:00:01", "x", key.first, key.second))) == want);
  }
}

TEST_CASE("identity flags") {
  const auto reg = golden_registry();
  std::istringstream deny_in("00:13:37\n");
  const auto deny = oui::load_deny_list(deny_in);
  auto id = [&](const char* b) {
    return codes(identity_flags(obs(b, "x", SecurityClass::kWpa2Psk), &reg, deny));
  };
  CHECK(id("02:11:22:33:44:55") == std::vector<std::string>{"ID_RANDOM_MAC"});
  CHECK(id("00:00:0c:12:34:56").empty());
  CHECK(id("00:13:37:00:00:10") == std::vector<std::string>{"ID_DENYLISTED_OUI"});
  CHECK(id("00:e0:4c:00:00:12") == std::vector<std::string>{"ID_UNKNOWN_VENDOR"});
  const auto f = identity_flags(obs("00:13:37:00:00:10", "x", SecurityClass::kOpen), &reg, deny);
  CHECK(f.at(0).level == L::kCriticalNegative);
  CHECK(f.at(0).evidence.at("prefix") == "00:13:37");
  CHECK(codes(identity_flags(obs("00:00:0c:12:34:56", "x", SecurityClass::kOpen), nullptr, {})) ==
        std::vector<std::string>{"ID_UNKNOWN_VENDOR"});
}

TEST_CASE("twin flags") {
  SUBCASE("distinct SSIDs") {
    const auto b = batch({obs("00:00:00:00:00:01", "a", SecurityClass::kOpen),
                          obs("00:00:00:00:00:02", "b", SecurityClass::kWep)});
    for (const auto& [k, v] : twin_flags(b, {})) CHECK(v.empty());
  }
  SUBCASE("hidden SSIDs never group") {
    const auto b = batch({obs("00:00:00:00:00:01", "", SecurityClass::kOpen),
                          obs("00:00:00:00:00:02", "", SecurityClass::kWep)});
    for (const auto& [k, v] : twin_flags(b, {})) CHECK(v.empty());
  }
  SUBCASE("security mismatch, no history") {
    const auto b = batch({obs("00:00:00:00:00:01", "CafeWiFi", SecurityClass::kWpa2Psk),
                          obs("00:00:00:00:00:02", "CafeWiFi", SecurityClass::kOpen)});
    const auto t = twin_flags(b, {});
    CHECK(codes(t.at(parse_bssid("00:00:00:00:00:01"))) == std::vector<std::string>{"TWIN_SECURITY_MISMATCH"});
    CHECK(codes(t.at(parse_bssid("00:00:00:00:00:02"))) == std::vector<std::string>{"TWIN_SECURITY_MISMATCH"});
  }
  SUBCASE("same security is a plain collision") {
    const auto b = batch({obs("00:00:00:00:00:01", "CafeWiFi", SecurityClass::kWpa2Psk),
                          obs("00:00:00:00:00:02", "CafeWiFi", SecurityClass::kWpa2Psk)});
    for (const auto& [k, v] : twin_flags(b, {}))
      CHECK(as_pairs(v) == Expected{{"TWIN_SSID_COLLISION", L::kPotentialNegative}});
  }
  SUBCASE("established incumbent, new weaker AP") {
    const auto inc = parse_bssid("00:00:00:00:00:11");
    history::ApHistory h;
    h.bssid = inc;
    for (const char* at : {"2024-05-01T10:00:00Z", "2024-05-08T10:00:00Z", "2024-05-15T10:00:00Z",
                           "2024-05-28T10:00:00Z"})
      h.records.push_back(obs("00:00:00:00:00:11", "CafeWiFi", SecurityClass::kWpa2Psk, false, at));
    const auto b = batch({obs("00:00:00:00:00:11", "CafeWiFi", SecurityClass::kWpa2Psk),
                          obs("00:00:00:00:00:12", "CafeWiFi", SecurityClass::kOpen)});
    const auto t = twin_flags(b, {{inc, h}});
    const auto& newcomer = t.at(parse_bssid("00:00:00:00:00:12"));
    CHECK(as_pairs(newcomer) == Expected{{"TWIN_NEW_WEAKER", L::kCriticalNegative},
                                         {"TWIN_SECURITY_MISMATCH", L::kNegative}});
    CHECK(newcomer.at(0).evidence.at("incumbent") == "00:00:00:00:00:11");
    CHECK(codes(t.at(inc)) == std::vector<std::string>{"TWIN_SECURITY_MISMATCH"});

    // Two records are not enough.
    h.records.resize(2);
    const auto t2 = twin_flags(b, {{inc, h}});
    CHECK(codes(t2.at(parse_bssid("00:00:00:00:00:12"))) == std::vector<std::string>{"TWIN_SECURITY_MISMATCH"});
  }
  SUBCASE("stronger newcomer is not flagged as weaker") {
    const auto inc = parse_bssid("00:00:00:00:00:11");
    history::ApHistory h;
    h.bssid = inc;
    for (const char* at : {"2024-05-01T10:00:00Z", "2024-05-08T10:00:00Z", "2024-05-15T10:00:00Z"})
      h.records.push_back(obs("00:00:00:00:00:11", "CafeWiFi", SecurityClass::kOpen, false, at));
    const auto b = batch({obs("00:00:00:00:00:11", "CafeWiFi", SecurityClass::kOpen),
                          obs("00:00:00:00:00:12", "CafeWiFi", SecurityClass::kWpa2Psk)});
    const auto t = twin_flags(b, {{inc, h}});
    CHECK(codes(t.at(parse_bssid("00:00:00:00:00:12"))) == std::vector<std::string>{"TWIN_SECURITY_MISMATCH"});
  }
}

TEST_CASE("weakness follows the protocol flag levels") {
  for (auto a : kAllSecurityClasses)
    for (auto b : kAllSecurityClasses) {
      const auto la = protocol_flags(obs("00:00:0c:00:00:01", "x", a)).at(0).level;
      const auto lb = protocol_flags(obs("00:00:0c:00:00:01", "x", b)).at(0).level;
      CHECK((la > lb) == (weakness(a) > weakness(b)));
    }
}

TEST_CASE("deviation flags") {
  using history::Deviation;
  using history::DeviationKind;
  CHECK(deviation_flags({}).empty());
  Deviation sec{DeviationKind::kSecurityChanged, "WPA2_PSK", "WPA_TKIP", {}, {}, {}};
  CHECK(as_pairs(deviation_flags({sec})) == Expected{{"HIST_SECURITY_CHANGED", L::kNegative}});
  Deviation ch{DeviationKind::kChannelChanged, "6", "11", {}, {}, {}};
  Deviation ss{DeviationKind::kSsidChanged, "a", "b", {}, {}, {}};
  CHECK(as_pairs(deviation_flags({ch, ss})) ==
        Expected{{"HIST_SSID_CHANGED", L::kNegative}, {"HIST_CHANNEL_CHANGED", L::kPotentialNegative}});
}

TEST_CASE("wigle flags") {
  using wigle::WigleFinding;
  using wigle::WigleStatus;
  auto with = [](WigleStatus s) {
    WigleOutcome o;
    o.finding = WigleFinding{s, std::nullopt, std::nullopt};
    return as_pairs(wigle_flags(o));
  };
  CHECK(with(WigleStatus::kConsistent).empty());
  CHECK(with(WigleStatus::kUnknownToWigle) == Expected{{"WIGLE_UNKNOWN", L::kPotentialNegative}});
  CHECK(with(WigleStatus::kSsidMismatch) == Expected{{"WIGLE_CHANGED", L::kNegative}});
  CHECK(with(WigleStatus::kSecurityMismatch) == Expected{{"WIGLE_CHANGED", L::kNegative}});
  CHECK(with(WigleStatus::kLocationMismatch) == Expected{{"WIGLE_LOCATION", L::kNegative}});
  WigleOutcome err;
  err.error = ErrorCode::kAuthFailed;
  const auto f = wigle_flags(err);
  CHECK(as_pairs(f) == Expected{{"WIGLE_UNAVAILABLE", L::kUndetermined}});
  CHECK(f.at(0).evidence.at("error") == "AUTH_FAILED");
}

TEST_CASE("merge keeps the highest level per code") {
  auto a = make_flag("SEC_OPEN", {{"k", "1"}});
  auto b = a;
  b.level = L::kCriticalNegative;
  const auto m = merge_flags({a, make_flag("SEC_WPS", {{"k", "v"}}), b});
  CHECK(as_pairs(m) == Expected{{"SEC_OPEN", L::kCriticalNegative}, {"SEC_WPS", L::kNegative}});
}

TEST_CASE("assess: empty batch and single open AP") {
  const auto reg = golden_registry();
  RuleContext empty;
  empty.registry = &reg;
  CHECK(assess(empty).empty());

  std::istringstream in(testing::slurp(testing::fixture("open_single.jsonl")));
  RuleContext ctx;
  ctx.registry = &reg;
  ctx.batch.observations = ingest::parse_canonical(in, ingest::ParseMode::kStrict).observations;
  ctx.batch = ingest::normalize(ctx.batch);
  const auto r = assess(ctx);
  REQUIRE(r.size() == 1);
  CHECK(as_pairs(r.begin()->second.flags) == Expected{{"SEC_OPEN", L::kNegative}});
}

namespace {

RuleContext random_context(std::mt19937& rng, const oui::OuiRegistry& reg) {
  const char* ssids[] = {"CafeWiFi", "Home", ""};
  const char* prefixes[] = {"00:00:0c", "00:13:37", "06:aa:bb", "00:e0:4c", "8c:1f:64"};
  std::vector<AccessPointObservation> v;
  RuleContext ctx;
  ctx.registry = &reg;
  const int n = 1 + static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) {
    char mac[18];
    std::snprintf(mac, sizeof mac, "%s:00:00:%02x", prefixes[rng() % 5], unsigned(rng() % 16));
    auto o = obs(mac, ssids[rng() % 3], kAllSecurityClasses[rng() % 9], rng() % 2);
    o.rssi_dbm = -static_cast<int>(rng() % 100);
    v.push_back(o);
    if (rng() % 2) {
      auto& h = ctx.histories[o.bssid];
      h.bssid = o.bssid;
      for (int k = 0; k < static_cast<int>(rng() % 5); ++k) {
        char at[32];
        std::snprintf(at, sizeof at, "2024-05-%02dT10:00:00Z", 1 + k);
        h.records.push_back(obs(mac, ssids[rng() % 3], kAllSecurityClasses[rng() % 9], false, at,
                                static_cast<int>(rng() % 3)));
      }
    }
  }
  ctx.batch = batch(v);
  return ctx;
}

}  // namespace

TEST_CASE("assess: deterministic, rssi-blind, deny-list monotone") {
  const auto reg = golden_registry();
  std::mt19937 rng(77);
  for (int round = 0; round < 300; ++round) {
    auto ctx = random_context(rng, reg);
    const auto base = assess(ctx);
    // Same context twice.
    const auto again = assess(ctx);
    for (const auto& [k, s] : base) CHECK(again.at(k).flags == s.flags);

    // Scramble signal strengths.
    auto noisy = ctx;
    for (auto& o : noisy.batch.observations) o.rssi_dbm = -static_cast<int>(rng() % 121);
    for (auto& [k, h] : noisy.histories)
      for (auto& r : h.records) r.rssi_dbm = -static_cast<int>(rng() % 121);
    const auto n = assess(noisy);
    for (const auto& [k, s] : base) CHECK(n.at(k).flags == s.flags);

    // Add a deny-list entry: nothing is removed or lowered.
    auto denied = ctx;
    const char* cand[] = {"00:00:0c", "00:e0:4c", "06:aa:bb", "8c:1f:64"};
    auto prefixes = denied.deny_list.prefixes();
    prefixes.push_back(*oui::parse_prefix(cand[rng() % 4]));
    denied.deny_list = oui::DenyList(prefixes);
    const auto d = assess(denied);
    for (const auto& [k, s] : base) {
      std::map<std::string, L> after;
      for (const auto& f : d.at(k).flags) after[f.code] = f.level;
      for (const auto& f : s.flags) {
        REQUIRE(after.count(f.code));
        CHECK(after[f.code] >= f.level);
      }
    }
    // Output invariants.
    for (const auto& [k, s] : base) {
      for (std::size_t i = 1; i < s.flags.size(); ++i) {
        CHECK(flag_order(s.flags[i - 1], s.flags[i]));
        CHECK(s.flags[i - 1].code != s.flags[i].code);
      }
      for (const auto& f : s.flags) CHECK_FALSE(f.evidence.empty());
    }
  }
}
