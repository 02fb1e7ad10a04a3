#include "wificue/core/security.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace wificue {
namespace {

constexpr std::array<std::string_view, 9> kNames = {
    "OPEN",     "OWE",      "WEP",      "WPA_TKIP",        "WPA2_PSK",
    "WPA2_ENTERPRISE", "WPA3_SAE", "WPA3_ENTERPRISE", "UNKNOWN"};

constexpr std::array<std::string_view, 5> kStructuralTokens = {
    "ESS", "IBSS", "MESH", "P2P", "WPS"};

// Higher is stronger; UNKNOWN never competes.
int strength(SecurityClass c) {
  switch (c) {
    case SecurityClass::kOpen: return 0;
    case SecurityClass::kOwe: return 1;
    case SecurityClass::kWep: return 2;
    case SecurityClass::kWpaTkip: return 3;
    case SecurityClass::kWpa2Psk: return 4;
    case SecurityClass::kWpa2Enterprise: return 5;
    case SecurityClass::kWpa3Sae: return 6;
    case SecurityClass::kWpa3Enterprise: return 7;
    case SecurityClass::kUnknown: return -1;
  }
  return -1;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool has_segment(std::string_view token, std::string_view segment) {
  std::size_t start = 0;
  while (start <= token.size()) {
    std::size_t end = token.find_first_of("-+", start);
    if (end == std::string_view::npos) end = token.size();
    if (token.substr(start, end - start) == segment) return true;
    start = end + 1;
  }
  return false;
}

std::optional<SecurityClass> token_class(std::string_view t) {
  if (starts_with(t, "WPA3-EAP")) return SecurityClass::kWpa3Enterprise;
  if (starts_with(t, "WPA3-SAE") || has_segment(t, "SAE")) {
    return SecurityClass::kWpa3Sae;
  }
  if (starts_with(t, "WPA2-EAP")) return SecurityClass::kWpa2Enterprise;
  if (starts_with(t, "WPA2-PSK")) return SecurityClass::kWpa2Psk;
  if (starts_with(t, "WPA-")) return SecurityClass::kWpaTkip;
  if (starts_with(t, "WEP")) return SecurityClass::kWep;
  if (has_segment(t, "OWE")) return SecurityClass::kOwe;
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view caps) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : caps) {
    if (c == '[' || c == ']' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(
          static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

std::string_view to_string(SecurityClass c) {
  return kNames[static_cast<std::size_t>(c)];
}

std::optional<SecurityClass> security_class_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<SecurityClass>(i);
  }
  return std::nullopt;
}

SecurityInfo classify_security(std::string_view capabilities) {
  SecurityInfo info;
  std::optional<SecurityClass> best;
  bool only_structural = true;
  const auto tokens = tokenize(capabilities);
  for (const auto& token : tokens) {
    if (token == "WPS") info.wps_advertised = true;
    if (auto c = token_class(token)) {
      if (!best || strength(*c) > strength(*best)) best = c;
    } else if (std::find(kStructuralTokens.begin(), kStructuralTokens.end(),
                         token) == kStructuralTokens.end()) {
      only_structural = false;
    }
  }
  if (best) {
    info.security = *best;
  } else if (!tokens.empty() && only_structural) {
    info.security = SecurityClass::kOpen;
  } else {
    info.security = SecurityClass::kUnknown;
  }
  return info;
}

}  // namespace wificue
