#include "wificue/core/time.hpp"

#include <charconv>
#include <cstdio>

#include "wificue/core/error.hpp"

namespace wificue {
namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t width,
              int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return true;
}

// Parses "YYYY-MM-DD?HH:MM:SS" where ? is one of `separators`; returns the
// position just after the seconds field.
std::optional<std::pair<Timestamp, std::size_t>> parse_civil(
    std::string_view text, std::string_view separators) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 19 || text[4] != '-' ||
      !read_int(text, 5, 2, mo) || text[7] != '-' ||
      !read_int(text, 8, 2, d) ||
      separators.find(text[10]) == std::string_view::npos ||
      !read_int(text, 11, 2, h) || text[13] != ':' ||
      !read_int(text, 14, 2, mi) || text[16] != ':' ||
      !read_int(text, 17, 2, s)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  const Timestamp t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return std::make_pair(t, std::size_t{19});
}

}  // namespace

std::optional<Timestamp> try_parse_rfc3339(std::string_view text) {
  auto civil = parse_civil(text, "Tt ");
  if (!civil) return std::nullopt;
  auto [t, pos] = *civil;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;
  if ((text[pos] == 'Z' || text[pos] == 'z') && pos + 1 == text.size()) {
    return t;
  }
  if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() &&
      text[pos + 3] == ':') {
    int oh = 0, om = 0;
    if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om) ||
        oh > 23 || om > 59) {
      return std::nullopt;
    }
    const std::chrono::seconds offset{oh * 3600 + om * 60};
    return text[pos] == '+' ? t - offset : t + offset;
  }
  return std::nullopt;
}

Timestamp parse_rfc3339(std::string_view text) {
  if (auto t = try_parse_rfc3339(text)) return *t;
  throw Error(ErrorCode::kMalformed,
              "invalid RFC 3339 timestamp '" + std::string(text) + "'");
}

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_naive_utc(std::string_view text) {
  auto civil = parse_civil(text, " Tt");
  if (!civil || civil->second != text.size()) {
    throw Error(ErrorCode::kMalformed,
                "invalid timestamp '" + std::string(text) + "'");
  }
  return civil->first;
}

Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

double days_between(Timestamp earlier, Timestamp later) {
  return static_cast<double>((later - earlier).count()) / 86400.0;
}

}  // namespace wificue
