#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace wificue {

// All timestamps are UTC with second precision.
using Timestamp = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DDTHH:MM:SS" followed by "Z" or a "+HH:MM"/"-HH:MM"
// offset; fractional seconds are truncated. Throws Error(kMalformed).
Timestamp parse_rfc3339(std::string_view text);
std::optional<Timestamp> try_parse_rfc3339(std::string_view text);

// Always "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);

// "YYYY-MM-DD HH:MM:SS" without zone information, interpreted as UTC.
Timestamp parse_naive_utc(std::string_view text);

Timestamp now_utc();

double days_between(Timestamp earlier, Timestamp later);

}  // namespace wificue
