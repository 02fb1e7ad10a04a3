#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wificue/ingest/scan_ingest.hpp"
#include "wificue/probe/probe.hpp"
#include "wificue/recommend/recommender.hpp"

namespace wificue::service {

// Appends `line` plus a newline with O_APPEND and fsync. Throws
// Error(kStorageIo).
void append_line(const std::filesystem::path& path, const std::string& line);

// Small JSON-lines stores kept beside the history file. An empty path keeps
// the data in memory. All methods are thread-safe.

class FeedbackStore {
 public:
  FeedbackStore() = default;
  explicit FeedbackStore(std::filesystem::path path);

  void add(const recommend::FeedbackReport& report);
  std::vector<recommend::FeedbackReport> for_bssid(const Bssid& bssid) const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::multimap<Bssid, recommend::FeedbackReport> reports_;
};

// Latest probe result per BSSID; a newer submission supersedes the old one.
class ProbeStore {
 public:
  ProbeStore() = default;
  explicit ProbeStore(std::filesystem::path path);

  void put(const probe::ProbeResult& result);
  std::map<Bssid, probe::ProbeResult> latest() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<Bssid, probe::ProbeResult> latest_;
};

class ScanStore {
 public:
  ScanStore() = default;
  explicit ScanStore(std::filesystem::path path);

  // False when the scan id is already stored; the stored copy is kept.
  bool put(const ingest::ScanBatch& batch);
  std::optional<ingest::ScanBatch> get(const std::string& scan_id) const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, ingest::ScanBatch> scans_;
};

}  // namespace wificue::service
