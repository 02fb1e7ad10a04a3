#include "wificue/ingest/scan_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>

#include "wificue/core/error.hpp"

namespace wificue::ingest {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : split(trim(s), ' ')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

void record(ParseResult& result, ParseMode mode, const Error& e,
            std::size_t line) {
  if (mode == ParseMode::kStrict) {
    if (e.line() == line) throw e;
    throw Error(e.code(), "line " + std::to_string(line) + ": " + e.what(),
                e.field(), line);
  }
  ++result.skipped;
  result.errors.push_back({line, e.field(), e.what()});
}

std::optional<int> to_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

struct AirodumpColumns {
  std::size_t count = 0;
  std::size_t bssid = 0, last_seen = 0, channel = 0, privacy = 0, cipher = 0,
              auth = 0, power = 0, essid = 0;
};

std::optional<AirodumpColumns> read_header(std::string_view line) {
  const auto cols = split(line, ',');
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    index.emplace(std::string(trim(cols[i])), i);
  }
  AirodumpColumns c;
  c.count = cols.size();
  const std::pair<const char*, std::size_t*> wanted[] = {
      {"BSSID", &c.bssid},         {"Last time seen", &c.last_seen},
      {"channel", &c.channel},     {"Privacy", &c.privacy},
      {"Cipher", &c.cipher},       {"Authentication", &c.auth},
      {"Power", &c.power},         {"ESSID", &c.essid}};
  for (auto [name, slot] : wanted) {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    *slot = it->second;
  }
  return c;
}

AccessPointObservation parse_ap_row(std::string_view line,
                                    const AirodumpColumns& c,
                                    const AirodumpOptions& options,
                                    std::size_t line_no) {
  const auto cols = split(line, ',');
  if (cols.size() < c.count) {
    throw Error(ErrorCode::kSchemaViolation,
                "row has " + std::to_string(cols.size()) + " columns, header has " +
                    std::to_string(c.count),
                "row", line_no);
  }
  AccessPointObservation obs;
  try {
    obs.bssid = parse_bssid(trim(cols[c.bssid]));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what(), "bssid", line_no);
  }
  try {
    obs.observed_at = parse_naive_utc(trim(cols[c.last_seen]));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what(), "observed_at", line_no);
  }
  const auto channel = to_int(cols[c.channel]);
  if (!channel) {
    throw Error(ErrorCode::kSchemaViolation, "channel is not an integer",
                "channel", line_no);
  }
  obs.channel = std::max(*channel, 0);
  obs.frequency_mhz = frequency_for_channel(obs.channel);
  const auto power = to_int(cols[c.power]);
  if (!power) {
    throw Error(ErrorCode::kSchemaViolation, "power is not an integer",
                "rssi_dbm", line_no);
  }
  obs.rssi_dbm = *power;
  obs.capabilities = airodump_capabilities(cols[c.privacy], cols[c.cipher],
                                           cols[c.auth]);
  obs.security = classify_security(obs.capabilities);

  // ESSID is not quoted and may itself contain commas; every column after
  // it is fixed, so it spans whatever is left over.
  const std::size_t trailing = c.count - c.essid - 1;
  std::vector<std::string> essid_parts;
  for (std::size_t i = c.essid; i < cols.size() - trailing; ++i) {
    essid_parts.emplace_back(cols[i]);
  }
  std::string essid(trim(join(essid_parts, ",")));
  if (std::all_of(essid.begin(), essid.end(), [](char ch) { return ch == '\0'; })) {
    essid.clear();
  }
  try {
    obs.ssid = Ssid(essid);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what(), "ssid", line_no);
  }
  obs.scanner_id = options.scanner_id;
  try {
    validate_observation(obs);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaViolation, e.what(), e.field(), line_no);
  }
  return obs;
}

}  // namespace

ParseResult parse_canonical(std::istream& in, ParseMode mode,
                            std::optional<Timestamp> ingest_time) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      result.observations.push_back(
          decode_observation(trim(line), line_no, ingest_time));
    } catch (const Error& e) {
      record(result, mode, e, line_no);
    }
  }
  return result;
}

ParseResult parse_airodump_csv(std::istream& in,
                               const AirodumpOptions& options) {
  ParseResult result;
  std::optional<AirodumpColumns> columns;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (!columns) {
      if (text.rfind("BSSID", 0) == 0 &&
          text.find("First time seen") != std::string_view::npos) {
        columns = read_header(text);
        if (!columns) {
          throw Error(ErrorCode::kMalformedHeader,
                      "access point header is missing required columns",
                      "header", line_no);
        }
      } else if (text.rfind("Station MAC", 0) == 0) {
        break;
      }
      continue;
    }
    if (text.empty()) continue;
    if (text.rfind("Station MAC", 0) == 0) break;
    try {
      result.observations.push_back(
          parse_ap_row(line, *columns, options, line_no));
    } catch (const Error& e) {
      record(result, options.mode, e, line_no);
    }
  }
  if (!columns) {
    throw Error(ErrorCode::kMalformedHeader,
                "no access point section (\"BSSID, First time seen, ...\")",
                "header");
  }
  return result;
}

std::string airodump_capabilities(std::string_view privacy,
                                  std::string_view cipher,
                                  std::string_view auth) {
  auto auth_words = words(auth);
  for (auto& a : auth_words) {
    if (a == "MGT") a = "EAP";
  }
  const std::string auth_part = join(auth_words, "+");
  const std::string cipher_part = join(words(cipher), "+");

  std::vector<std::string> tokens;
  for (const auto& p : words(privacy)) {
    std::string token;
    if (p == "OPN") {
      token = "[ESS]";
    } else if (p == "WEP") {
      token = "[WEP]";
    } else {
      token = "[" + p;
      if (!auth_part.empty()) token += "-" + auth_part;
      if (!cipher_part.empty()) token += "-" + cipher_part;
      token += "]";
    }
    if (std::find(tokens.begin(), tokens.end(), token) == tokens.end()) {
      tokens.push_back(std::move(token));
    }
  }
  return join(tokens, "");
}

int frequency_for_channel(int channel) {
  if (channel >= 1 && channel <= 13) return 2407 + 5 * channel;
  if (channel == 14) return 2484;
  if (channel >= 32 && channel <= 177) return 5000 + 5 * channel;
  return 0;
}

ScanBatch normalize(ScanBatch batch) {
  std::map<Bssid, std::size_t> best;
  const auto& obs = batch.observations;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    auto [it, inserted] = best.emplace(obs[i].bssid, i);
    if (inserted) continue;
    const auto& cur = obs[it->second];
    if (obs[i].rssi_dbm > cur.rssi_dbm ||
        (obs[i].rssi_dbm == cur.rssi_dbm && obs[i].observed_at > cur.observed_at)) {
      it->second = i;
    }
  }
  std::vector<AccessPointObservation> kept;
  kept.reserve(best.size());
  for (const auto& [bssid, index] : best) kept.push_back(obs[index]);
  batch.observations = std::move(kept);
  return batch;
}

}  // namespace wificue::ingest
