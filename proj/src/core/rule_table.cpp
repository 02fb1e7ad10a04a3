#include "wificue/core/rule_table.hpp"

#include <array>
#include <stdexcept>

namespace wificue {
namespace {

using L = FlagLevel;

constexpr std::array<RuleInfo, 28> kRules{{
    // Protocol. One flag per security class plus WPS.
    {"SEC_WEP", L::kCriticalNegative,
     "WEP is retired and its encryption can be broken quickly"},
    {"SEC_OPEN", L::kNegative,
     "Open network: traffic is not encrypted at the link layer"},
    {"SEC_WPA_TKIP", L::kNegative,
     "WPA with TKIP is deprecated and no longer considered secure"},
    {"SEC_WPA2_PSK", L::kPotentialNegative,
     "WPA2 pre-shared key: offline brute force is possible with weak passphrases"},
    {"SEC_WPA2_ENTERPRISE", L::kPotentialNegative,
     "WPA2 Enterprise: EAP methods other than EAP-TLS have known weaknesses"},
    {"SEC_WPA3_SAE", L::kPotentialNegative,
     "WPA3 SAE: the Dragonfly handshake has published implementation flaws"},
    {"SEC_WPA3_ENTERPRISE", L::kUndetermined,
     "WPA3 Enterprise: no protocol-level concern recorded"},
    {"SEC_OWE", L::kUndetermined,
     "Opportunistic Wireless Encryption: no documented issues"},
    {"SEC_UNKNOWN", L::kUndetermined,
     "Security capabilities could not be classified"},
    {"SEC_WPS", L::kNegative,
     "WPS is advertised; its PIN method is vulnerable to brute force"},
    // Identity.
    {"ID_DENYLISTED_OUI", L::kCriticalNegative,
     "Vendor prefix is on the operator deny list"},
    {"ID_RANDOM_MAC", L::kPotentialNegative,
     "BSSID is locally administered (randomized or software-assigned)"},
    {"ID_UNKNOWN_VENDOR", L::kPotentialNegative,
     "BSSID vendor prefix is not in the OUI registry"},
    // Evil twin.
    {"TWIN_NEW_WEAKER", L::kCriticalNegative,
     "Previously unseen AP uses an established network name with weaker security"},
    {"TWIN_SECURITY_MISMATCH", L::kNegative,
     "APs sharing this network name advertise different security"},
    {"TWIN_SSID_COLLISION", L::kPotentialNegative,
     "Several APs share this network name"},
    // History.
    {"HIST_SECURITY_CHANGED", L::kNegative,
     "Security settings differ from the last time this AP was seen"},
    {"HIST_SSID_CHANGED", L::kNegative,
     "Network name differs from the last time this AP was seen"},
    {"HIST_CHANNEL_CHANGED", L::kPotentialNegative,
     "Channel differs from the last time this AP was seen"},
    // WIGLE.
    {"WIGLE_CHANGED", L::kNegative,
     "WIGLE records a different network name or security for this BSSID"},
    {"WIGLE_LOCATION", L::kNegative,
     "WIGLE places this BSSID more than 1 km from where it was observed"},
    {"WIGLE_UNKNOWN", L::kPotentialNegative, "WIGLE has no record of this BSSID"},
    {"WIGLE_UNAVAILABLE", L::kUndetermined, "WIGLE lookup failed; no data"},
    // Post-connection probe.
    {"PROBE_DNS_TAMPER", L::kCriticalNegative,
     "DNS answers disagree with the trusted baseline"},
    {"PROBE_TLS_TAMPER", L::kCriticalNegative,
     "TLS certificate key does not match the pinned key"},
    {"PROBE_NO_INTERNET", L::kNegative,
     "No probe reached the internet through this AP"},
    {"PROBE_DNS_DRIFT", L::kPotentialNegative,
     "DNS answers only partly match the baseline"},
    {"PROBE_PORTAL", L::kPotentialNegative,
     "Captive portal or HTTP interception detected"},
}};

}  // namespace

std::span<const RuleInfo> rule_table() { return kRules; }

const RuleInfo& rule_info(std::string_view code) {
  for (const auto& r : kRules) {
    if (r.code == code) return r;
  }
  throw std::out_of_range("unregistered flag code " + std::string(code));
}

Flag make_flag(std::string_view code,
               std::map<std::string, std::string> evidence) {
  const auto& info = rule_info(code);
  return Flag{info.level, std::string(info.code), std::string(info.message),
              std::move(evidence)};
}

}  // namespace wificue
