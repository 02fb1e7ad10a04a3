#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wificue {

// Severity of a finding. Enumerator values increase with severity so the
// built-in comparison operators give the total order
// UNDETERMINED < POTENTIAL_NEGATIVE < NEGATIVE < CRITICAL_NEGATIVE.
enum class FlagLevel {
  kUndetermined = 0,
  kPotentialNegative = 1,
  kNegative = 2,
  kCriticalNegative = 3,
};

std::string_view to_string(FlagLevel level);
std::optional<FlagLevel> flag_level_from_string(std::string_view name);

struct Flag {
  FlagLevel level = FlagLevel::kUndetermined;
  std::string code;
  std::string message;
  std::map<std::string, std::string> evidence;  // never empty

  bool operator==(const Flag&) const = default;
};

// Severity descending, then code ascending.
bool flag_order(const Flag& a, const Flag& b);
void sort_flags(std::vector<Flag>& flags);

}  // namespace wificue
