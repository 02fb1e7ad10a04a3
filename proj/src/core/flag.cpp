#include "wificue/core/flag.hpp"

#include <algorithm>
#include <array>

namespace wificue {
namespace {
constexpr std::array<std::string_view, 4> kLevelNames = {
    "UNDETERMINED", "POTENTIAL_NEGATIVE", "NEGATIVE", "CRITICAL_NEGATIVE"};
}

std::string_view to_string(FlagLevel level) {
  return kLevelNames[static_cast<std::size_t>(level)];
}

std::optional<FlagLevel> flag_level_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
    if (kLevelNames[i] == name) return static_cast<FlagLevel>(i);
  }
  return std::nullopt;
}

bool flag_order(const Flag& a, const Flag& b) {
  if (a.level != b.level) return a.level > b.level;
  return a.code < b.code;
}

void sort_flags(std::vector<Flag>& flags) {
  std::stable_sort(flags.begin(), flags.end(), flag_order);
}

}  // namespace wificue
