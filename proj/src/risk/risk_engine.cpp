#include "wificue/risk/risk_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <tuple>

#include "wificue/core/rule_table.hpp"

namespace wificue::risk {
namespace {

std::string_view protocol_code(SecurityClass security) {
  switch (security) {
    case SecurityClass::kOpen: return "SEC_OPEN";
    case SecurityClass::kOwe: return "SEC_OWE";
    case SecurityClass::kWep: return "SEC_WEP";
    case SecurityClass::kWpaTkip: return "SEC_WPA_TKIP";
    case SecurityClass::kWpa2Psk: return "SEC_WPA2_PSK";
    case SecurityClass::kWpa2Enterprise: return "SEC_WPA2_ENTERPRISE";
    case SecurityClass::kWpa3Sae: return "SEC_WPA3_SAE";
    case SecurityClass::kWpa3Enterprise: return "SEC_WPA3_ENTERPRISE";
    case SecurityClass::kUnknown: return "SEC_UNKNOWN";
  }
  return "SEC_UNKNOWN";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string hex_octet(std::uint8_t o) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02x", o);
  return buf;
}

using Key = std::tuple<Bssid, Timestamp, std::string>;

Key key_of(const AccessPointObservation& o) {
  return {o.bssid, o.observed_at, o.scanner_id};
}

// Records for `ssid` seen before `before`, per BSSID, excluding the batch's
// own sightings.
struct SsidRecord {
  std::size_t count = 0;
  SecurityClass latest_security = SecurityClass::kUnknown;
  Timestamp latest{};
};

std::map<Bssid, SsidRecord> prior_by_ssid(
    const std::map<Bssid, history::ApHistory>& histories, const Ssid& ssid,
    Timestamp before, const std::set<Key>& batch_keys) {
  std::map<Bssid, SsidRecord> out;
  for (const auto& [bssid, h] : histories) {
    for (const auto& r : h.records) {
      if (r.observed_at >= before || r.ssid != ssid) continue;
      if (batch_keys.count(key_of(r))) continue;
      auto& rec = out[bssid];
      ++rec.count;
      if (rec.count == 1 || r.observed_at >= rec.latest) {
        rec.latest = r.observed_at;
        rec.latest_security = r.security.security;
      }
    }
  }
  return out;
}

}  // namespace

int weakness(SecurityClass security) {
  return static_cast<int>(rule_info(protocol_code(security)).level);
}

std::vector<Flag> protocol_flags(const AccessPointObservation& obs) {
  std::vector<Flag> flags;
  flags.push_back(make_flag(protocol_code(obs.security.security),
                            {{"capabilities", obs.capabilities},
                             {"security", std::string(to_string(obs.security.security))}}));
  if (obs.security.wps_advertised) {
    flags.push_back(make_flag("SEC_WPS", {{"capabilities", obs.capabilities}}));
  }
  sort_flags(flags);
  return flags;
}

std::vector<Flag> identity_flags(const AccessPointObservation& obs,
                                 const oui::OuiRegistry* registry,
                                 const oui::DenyList& deny_list) {
  std::vector<Flag> flags;
  const auto bssid = obs.bssid.to_string();
  if (auto prefix = deny_list.match(obs.bssid)) {
    flags.push_back(make_flag("ID_DENYLISTED_OUI",
                              {{"bssid", bssid}, {"prefix", prefix->to_string()}}));
  }
  if (oui::is_locally_administered(obs.bssid)) {
    flags.push_back(make_flag("ID_RANDOM_MAC",
                              {{"bssid", bssid},
                               {"first_octet", hex_octet(obs.bssid.octets()[0])}}));
  } else {
    const auto match = registry ? registry->lookup(obs.bssid) : oui::VendorMatch{};
    if (!match.matched) {
      flags.push_back(make_flag("ID_UNKNOWN_VENDOR",
                                {{"bssid", bssid}, {"oui", bssid.substr(0, 8)}}));
    }
  }
  sort_flags(flags);
  return flags;
}

std::map<Bssid, std::vector<Flag>> twin_flags(
    const ingest::ScanBatch& batch,
    const std::map<Bssid, history::ApHistory>& histories) {
  std::map<Ssid, std::vector<const AccessPointObservation*>> groups;
  std::set<Key> batch_keys;
  for (const auto& obs : batch.observations) {
    batch_keys.insert(key_of(obs));
    if (!obs.ssid.hidden()) groups[obs.ssid].push_back(&obs);
  }

  std::map<Bssid, std::vector<Flag>> out;
  for (const auto& [ssid, members] : groups) {
    if (members.size() < 2) continue;
    std::set<std::string> securities;
    for (const auto* m : members) {
      securities.insert(std::string(to_string(m->security.security)));
    }
    std::string joined;
    for (const auto& s : securities) joined += (joined.empty() ? "" : ",") + s;
    const std::string display = ssid.display();
    const std::string size = std::to_string(members.size());

    for (const auto* m : members) {
      auto& flags = out[m->bssid];
      if (securities.size() > 1) {
        flags.push_back(make_flag("TWIN_SECURITY_MISMATCH",
                                  {{"members", size},
                                   {"securities", joined},
                                   {"ssid", display}}));
      }

      const auto prior = prior_by_ssid(histories, ssid, m->observed_at, batch_keys);
      if (!prior.count(m->bssid)) {
        // Strongest established incumbent the newcomer is weaker than.
        const std::pair<const Bssid, SsidRecord>* incumbent = nullptr;
        for (const auto& entry : prior) {
          if (entry.second.count < kMinEstablished) continue;
          if (weakness(m->security.security) <= weakness(entry.second.latest_security)) {
            continue;
          }
          if (!incumbent ||
              weakness(entry.second.latest_security) <
                  weakness(incumbent->second.latest_security)) {
            incumbent = &entry;
          }
        }
        if (incumbent) {
          flags.push_back(make_flag(
              "TWIN_NEW_WEAKER",
              {{"incumbent", incumbent->first.to_string()},
               {"incumbent_records", std::to_string(incumbent->second.count)},
               {"incumbent_security",
                std::string(to_string(incumbent->second.latest_security))},
               {"security", std::string(to_string(m->security.security))},
               {"ssid", display}}));
        }
      }

      if (flags.empty()) {
        flags.push_back(make_flag("TWIN_SSID_COLLISION", {{"members", size}, {"ssid", display}}));
      }
      sort_flags(flags);
    }
  }
  return out;
}

std::vector<Flag> deviation_flags(const std::vector<history::Deviation>& deviations) {
  std::vector<Flag> flags;
  for (const auto& d : deviations) {
    std::string_view code;
    switch (d.kind) {
      case history::DeviationKind::kSecurityChanged: code = "HIST_SECURITY_CHANGED"; break;
      case history::DeviationKind::kSsidChanged: code = "HIST_SSID_CHANGED"; break;
      case history::DeviationKind::kChannelChanged: code = "HIST_CHANNEL_CHANGED"; break;
    }
    flags.push_back(make_flag(
        code, {{"after", d.after},
               {"before", d.before},
               {"first_seen_before", format_rfc3339(d.first_seen_before)},
               {"last_seen_before", format_rfc3339(d.last_seen_before)},
               {"record_age_days", fixed(days_between(d.last_seen_before, d.seen_after), 2)}}));
  }
  return merge_flags(std::move(flags));
}

std::vector<Flag> wigle_flags(const WigleOutcome& outcome) {
  std::vector<Flag> flags;
  if (outcome.error) {
    flags.push_back(make_flag("WIGLE_UNAVAILABLE",
                              {{"error", std::string(to_string(*outcome.error))}}));
    return flags;
  }
  if (!outcome.finding) return flags;
  const auto& f = *outcome.finding;
  std::map<std::string, std::string> evidence{{"status", std::string(to_string(f.status))}};
  if (f.detail) {
    evidence["wigle_encryption"] = f.detail->encryption;
    evidence["wigle_ssid"] = f.detail->ssid;
    if (f.detail->lastupdt) evidence["wigle_lastupdt"] = format_rfc3339(*f.detail->lastupdt);
  }
  if (f.distance_km) evidence["distance_km"] = fixed(*f.distance_km, 3);
  switch (f.status) {
    case wigle::WigleStatus::kUnknownToWigle:
      flags.push_back(make_flag("WIGLE_UNKNOWN", std::move(evidence)));
      break;
    case wigle::WigleStatus::kSsidMismatch:
    case wigle::WigleStatus::kSecurityMismatch:
      flags.push_back(make_flag("WIGLE_CHANGED", std::move(evidence)));
      break;
    case wigle::WigleStatus::kLocationMismatch:
      flags.push_back(make_flag("WIGLE_LOCATION", std::move(evidence)));
      break;
    case wigle::WigleStatus::kConsistent:
      break;
  }
  return flags;
}

std::vector<Flag> merge_flags(std::vector<Flag> flags) {
  std::map<std::string, Flag> by_code;
  for (auto& f : flags) {
    auto it = by_code.find(f.code);
    if (it == by_code.end()) {
      by_code.emplace(f.code, std::move(f));
    } else if (f.level > it->second.level) {
      it->second = std::move(f);
    }
  }
  std::vector<Flag> out;
  out.reserve(by_code.size());
  for (auto& [code, f] : by_code) out.push_back(std::move(f));
  sort_flags(out);
  return out;
}

std::map<Bssid, ApFlagSet> assess(const RuleContext& context) {
  const auto twins = twin_flags(context.batch, context.histories);
  std::map<Bssid, ApFlagSet> out;
  for (const auto& obs : context.batch.observations) {
    std::vector<Flag> all = protocol_flags(obs);
    auto add = [&all](std::vector<Flag> more) {
      for (auto& f : more) all.push_back(std::move(f));
    };
    add(identity_flags(obs, context.registry, context.deny_list));
    if (auto it = twins.find(obs.bssid); it != twins.end()) add(it->second);
    if (auto it = context.histories.find(obs.bssid); it != context.histories.end()) {
      add(deviation_flags(history::detect_deviations(it->second, obs)));
    }
    if (auto it = context.wigle.find(obs.bssid); it != context.wigle.end()) {
      add(wigle_flags(it->second));
    }
    if (auto it = context.probes.find(obs.bssid); it != context.probes.end()) {
      add(probe::probe_flags(it->second));
    }
    out[obs.bssid] = ApFlagSet{obs.bssid, merge_flags(std::move(all))};
  }
  return out;
}

}  // namespace wificue::risk
