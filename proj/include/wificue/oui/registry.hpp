#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wificue/core/bssid.hpp"
#include "wificue/core/time.hpp"
#include "wificue/ingest/scan_ingest.hpp"

namespace wificue::oui {

// A MAC prefix of 24, 28 or 36 bits. `bits` holds the prefix left-aligned
// in the low 48 bits, with everything past `length` cleared.
struct Prefix {
  int length = 24;
  std::uint64_t bits = 0;

  bool matches(const Bssid& bssid) const;
  std::string to_string() const;  // "00:00:0c" or "8c:1f:64:00:00:00/36"

  auto operator<=>(const Prefix&) const = default;
};

// "00:00:0C", "00-00-0C", "8C:1F:64:00:00:00/36", ... Returns nullopt for
// anything else, including unsupported mask lengths.
std::optional<Prefix> parse_prefix(std::string_view text);

struct VendorMatch {
  bool matched = false;
  int prefix_len = 0;
  std::string short_name;
  std::string long_name;

  bool operator==(const VendorMatch&) const = default;
};

enum class LoadMode { kStrict, kLenient };

struct LoadReport {
  std::size_t skipped = 0;
  std::vector<std::string> problems;
};

// Vendor table keyed by prefix; longest matching prefix wins. Immutable once
// loaded, so concurrent lookups need no locking.
class OuiRegistry {
 public:
  OuiRegistry() = default;

  VendorMatch lookup(const Bssid& bssid) const;
  std::size_t size() const { return entries_.size(); }
  const std::string& source_version() const { return source_version_; }
  Timestamp loaded_at() const { return loaded_at_; }

 private:
  struct Names {
    std::string short_name;
    std::string long_name;
    auto operator<=>(const Names&) const = default;
  };

  friend OuiRegistry load_registry(std::istream&, LoadMode, Timestamp,
                                   LoadReport*);

  std::map<Prefix, Names> entries_;
  std::string source_version_;
  Timestamp loaded_at_{};
};

// Tab-separated manuf format: prefix, short name, optional long name;
// '#' starts a comment line. source_version is a fingerprint of the input
// bytes. Throws Error(kMalformedLine) (strict mode) or Error(kEmptyRegistry).
OuiRegistry load_registry(std::istream& in, LoadMode mode = LoadMode::kStrict,
                          Timestamp loaded_at = now_utc(),
                          LoadReport* report = nullptr);
OuiRegistry load_registry_file(const std::string& path,
                               LoadMode mode = LoadMode::kStrict,
                               Timestamp loaded_at = now_utc(),
                               LoadReport* report = nullptr);

// True iff the 0x02 bit of the first octet is set, the mark of randomized
// or software-assigned addresses.
bool is_locally_administered(const Bssid& bssid);

// Fraction of the batch whose BSSID has a registry match. Throws
// Error(kEmptyBatch) for an empty batch instead of reporting 0.
double identifiability_rate(const OuiRegistry& registry,
                            const ingest::ScanBatch& batch);

// Operator-maintained list of OUI prefixes known to be used by malicious
// hardware. Ships empty.
class DenyList {
 public:
  DenyList() = default;
  explicit DenyList(std::vector<Prefix> prefixes);

  // The first listed prefix covering `bssid`, in list order.
  std::optional<Prefix> match(const Bssid& bssid) const;
  const std::vector<Prefix>& prefixes() const { return prefixes_; }
  bool empty() const { return prefixes_.empty(); }

 private:
  std::vector<Prefix> prefixes_;
};

// One prefix per line, '#' comments. Throws Error(kMalformedLine).
DenyList load_deny_list(std::istream& in);
DenyList load_deny_list_file(const std::string& path);

}  // namespace wificue::oui
