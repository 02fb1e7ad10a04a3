#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "wificue/core/flag.hpp"

namespace wificue {

// Registered flag vocabulary. Codes are a stable public interface; levels
// and messages live here and nowhere else.
struct RuleInfo {
  std::string_view code;
  FlagLevel level;
  std::string_view message;
};

std::span<const RuleInfo> rule_table();

// Throws std::out_of_range for a code that is not registered.
const RuleInfo& rule_info(std::string_view code);

// Builds a flag at the rule's registered level. `evidence` must be
// non-empty.
Flag make_flag(std::string_view code, std::map<std::string, std::string> evidence);

}  // namespace wificue
