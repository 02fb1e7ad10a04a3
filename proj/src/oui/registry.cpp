#include "wificue/oui/registry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"

namespace wificue::oui {
namespace {

constexpr int kSupportedLengths[] = {36, 28, 24};

std::uint64_t to_u48(const Bssid& bssid) {
  std::uint64_t v = 0;
  for (auto o : bssid.octets()) v = (v << 8) | o;
  return v;
}

std::uint64_t mask_for(int length) {
  return ((std::uint64_t{1} << length) - 1) << (48 - length);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string read_all(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool Prefix::matches(const Bssid& bssid) const {
  return (to_u48(bssid) & mask_for(length)) == bits;
}

std::string Prefix::to_string() const {
  char buf[32];
  if (length == 24) {
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x",
                  static_cast<unsigned>(bits >> 40 & 0xff),
                  static_cast<unsigned>(bits >> 32 & 0xff),
                  static_cast<unsigned>(bits >> 24 & 0xff));
  } else {
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x/%d",
                  static_cast<unsigned>(bits >> 40 & 0xff),
                  static_cast<unsigned>(bits >> 32 & 0xff),
                  static_cast<unsigned>(bits >> 24 & 0xff),
                  static_cast<unsigned>(bits >> 16 & 0xff),
                  static_cast<unsigned>(bits >> 8 & 0xff),
                  static_cast<unsigned>(bits & 0xff), length);
  }
  return buf;
}

std::optional<Prefix> parse_prefix(std::string_view text) {
  text = trim(text);
  int length = -1;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto mask = text.substr(slash + 1);
    if (mask == "24") length = 24;
    else if (mask == "28") length = 28;
    else if (mask == "36") length = 36;
    else return std::nullopt;
    text = text.substr(0, slash);
  }
  std::uint64_t value = 0;
  std::size_t octets = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (octets > 0) {
      if (text[pos] != ':' && text[pos] != '-' && text[pos] != '.') {
        return std::nullopt;
      }
      ++pos;
    }
    if (pos + 2 > text.size()) return std::nullopt;
    const int hi = hex_value(text[pos]);
    const int lo = hex_value(text[pos + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    value = (value << 8) | static_cast<std::uint64_t>(hi << 4 | lo);
    ++octets;
    pos += 2;
    if (octets > 6) return std::nullopt;
  }
  if (length < 0) {
    if (octets != 3) return std::nullopt;
    length = 24;
  }
  if (octets * 8 < static_cast<std::size_t>(length)) return std::nullopt;
  value <<= 8 * (6 - octets);
  return Prefix{length, value & mask_for(length)};
}

VendorMatch OuiRegistry::lookup(const Bssid& bssid) const {
  const auto addr = to_u48(bssid);
  for (int length : kSupportedLengths) {
    auto it = entries_.find(Prefix{length, addr & mask_for(length)});
    if (it != entries_.end()) {
      return {true, length, it->second.short_name, it->second.long_name};
    }
  }
  return {};
}

OuiRegistry load_registry(std::istream& in, LoadMode mode, Timestamp loaded_at,
                          LoadReport* report) {
  const std::string content = read_all(in);
  OuiRegistry registry;
  registry.source_version_ = "fnv1a64:" + fnv1a64_hex(content);
  registry.loaded_at_ = loaded_at;

  auto problem = [&](std::size_t line_no, const std::string& why) {
    const std::string msg = "line " + std::to_string(line_no) + ": " + why;
    if (mode == LoadMode::kStrict) {
      throw Error(ErrorCode::kMalformedLine, msg, "manuf", line_no);
    }
    if (report) {
      ++report->skipped;
      report->problems.push_back(msg);
    }
  };

  std::istringstream lines(content);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(trim(line.substr(start, tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    const auto prefix = parse_prefix(cols[0]);
    if (!prefix) {
      problem(line_no, "unrecognized prefix '" + std::string(cols[0]) + "'");
      continue;
    }
    if (cols.size() < 2 || cols[1].empty()) {
      problem(line_no, "missing vendor name");
      continue;
    }
    OuiRegistry::Names names{std::string(cols[1]),
                             cols.size() > 2 ? std::string(cols[2]) : ""};
    auto [it, inserted] = registry.entries_.emplace(*prefix, names);
    if (!inserted && it->second != names) {
      problem(line_no, "conflicting entry for prefix " + prefix->to_string());
      // Lenient mode keeps the smaller entry so the outcome does not depend
      // on line order.
      it->second = std::min(it->second, names);
    }
  }
  if (registry.entries_.empty()) {
    throw Error(ErrorCode::kEmptyRegistry, "registry contains no entries",
                "manuf");
  }
  return registry;
}

OuiRegistry load_registry_file(const std::string& path, LoadMode mode,
                               Timestamp loaded_at, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kStorageIo, "cannot open registry file " + path);
  }
  return load_registry(in, mode, loaded_at, report);
}

bool is_locally_administered(const Bssid& bssid) {
  return (bssid.octets()[0] & Bssid::kLocallyAdministeredBit) != 0;
}

double identifiability_rate(const OuiRegistry& registry,
                            const ingest::ScanBatch& batch) {
  if (batch.observations.empty()) {
    throw Error(ErrorCode::kEmptyBatch,
                "identifiability rate is undefined for an empty batch");
  }
  const auto matched = std::count_if(
      batch.observations.begin(), batch.observations.end(),
      [&](const auto& obs) { return registry.lookup(obs.bssid).matched; });
  return static_cast<double>(matched) /
         static_cast<double>(batch.observations.size());
}

DenyList::DenyList(std::vector<Prefix> prefixes)
    : prefixes_(std::move(prefixes)) {}

std::optional<Prefix> DenyList::match(const Bssid& bssid) const {
  for (const auto& p : prefixes_) {
    if (p.matches(bssid)) return p;
  }
  return std::nullopt;
}

DenyList load_deny_list(std::istream& in) {
  std::vector<Prefix> prefixes;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    auto prefix = parse_prefix(line);
    if (!prefix) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) +
                      ": unrecognized prefix '" + std::string(line) + "'",
                  "deny_list", line_no);
    }
    if (std::find(prefixes.begin(), prefixes.end(), *prefix) == prefixes.end()) {
      prefixes.push_back(*prefix);
    }
  }
  return DenyList(std::move(prefixes));
}

DenyList load_deny_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kStorageIo, "cannot open deny list " + path);
  return load_deny_list(in);
}

}  // namespace wificue::oui
