#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string_view>

namespace wificue {

enum class SecurityClass {
  kOpen,
  kOwe,
  kWep,
  kWpaTkip,
  kWpa2Psk,
  kWpa2Enterprise,
  kWpa3Sae,
  kWpa3Enterprise,
  kUnknown,
};

inline constexpr std::array<SecurityClass, 9> kAllSecurityClasses = {
    SecurityClass::kOpen,          SecurityClass::kOwe,
    SecurityClass::kWep,           SecurityClass::kWpaTkip,
    SecurityClass::kWpa2Psk,       SecurityClass::kWpa2Enterprise,
    SecurityClass::kWpa3Sae,       SecurityClass::kWpa3Enterprise,
    SecurityClass::kUnknown,
};

std::string_view to_string(SecurityClass c);  // "WPA2_PSK", ...
std::optional<SecurityClass> security_class_from_string(std::string_view name);

struct SecurityInfo {
  SecurityClass security = SecurityClass::kUnknown;
  bool wps_advertised = false;

  auto operator<=>(const SecurityInfo&) const = default;
};

// Classifies a bracket-token capability string such as
// "[WPA2-PSK-CCMP][WPS][ESS]".
//
// Tokens are the bracketed (or whitespace separated) words, compared
// case-insensitively:
//   WEP*       -> WEP            WPA-*      -> WPA_TKIP
//   WPA2-PSK*  -> WPA2_PSK       WPA2-EAP*  -> WPA2_ENTERPRISE
//   WPA3-SAE*, any "SAE" segment          -> WPA3_SAE
//   WPA3-EAP*  -> WPA3_ENTERPRISE
//   any "OWE" segment                     -> OWE
// ESS, IBSS, MESH, P2P and WPS are structural tokens. When several security
// tokens are present the strongest wins:
//   WPA3_ENTERPRISE > WPA3_SAE > WPA2_ENTERPRISE > WPA2_PSK > WPA_TKIP > WEP
//   > OWE > OPEN.
// With no security token the result is OPEN if the string consists only of
// structural tokens (and at least one), otherwise UNKNOWN.
SecurityInfo classify_security(std::string_view capabilities);

}  // namespace wificue
