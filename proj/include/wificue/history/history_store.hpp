#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "wificue/core/observation.hpp"
#include "wificue/ingest/scan_ingest.hpp"

namespace wificue::history {

// All sightings of one BSSID, ascending by observed_at (ties by scanner_id).
struct ApHistory {
  Bssid bssid = Bssid::from_octets({});
  std::vector<AccessPointObservation> records;
};

struct HistoryPage {
  Bssid bssid = Bssid::from_octets({});
  std::size_t total = 0;
  std::size_t limit = 0;
  std::size_t offset = 0;
  std::vector<AccessPointObservation> records;  // newest first
};

enum class DeviationKind { kSecurityChanged, kSsidChanged, kChannelChanged };
std::string_view to_string(DeviationKind kind);

struct Deviation {
  DeviationKind kind = DeviationKind::kSecurityChanged;
  std::string before;
  std::string after;
  // Start of the run of prior records that carried `before`.
  Timestamp first_seen_before{};
  // observed_at of the most recent prior record.
  Timestamp last_seen_before{};
  Timestamp seen_after{};
};

// Compares `obs` with the most recent record strictly older than it and
// reports each changed field among security class, SSID and channel. RSSI
// and location are never compared.
std::vector<Deviation> detect_deviations(const ApHistory& history,
                                         const AccessPointObservation& obs);

// Append-only file of canonical observation lines with an in-memory index
// rebuilt on open. Lines are deduplicated on (bssid, observed_at,
// scanner_id). One writer at a time; readers take consistent snapshots.
//
// A default-constructed path keeps everything in memory.
class HistoryStore {
 public:
  HistoryStore() = default;
  // Throws Error(kStorageIo) when the file exists but cannot be read or
  // holds a corrupt line. A torn final line (no newline) is dropped and
  // truncated away.
  explicit HistoryStore(std::filesystem::path path);

  HistoryStore(const HistoryStore&) = delete;
  HistoryStore& operator=(const HistoryStore&) = delete;

  // Returns how many observations were new. Throws Error(kStorageIo).
  std::size_t append(const ingest::ScanBatch& batch);

  ApHistory history(const Bssid& bssid) const;
  HistoryPage page(const Bssid& bssid, std::size_t limit,
                   std::size_t offset) const;
  std::map<Bssid, ApHistory> snapshot() const;
  std::size_t record_count() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  using Key = std::tuple<Bssid, Timestamp, std::string>;

  void index(AccessPointObservation obs);

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<Bssid, std::vector<AccessPointObservation>> by_bssid_;
  std::set<Key> keys_;
  std::size_t count_ = 0;
};

}  // namespace wificue::history
