#include "wificue/service/stores.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "wificue/core/error.hpp"

namespace wificue::service {
namespace {

[[noreturn]] void io_error(const std::string& what, const std::filesystem::path& path) {
  throw Error(ErrorCode::kStorageIo, what + " " + path.string() + ": " + std::strerror(errno));
}

// Calls `fn` on each non-empty line. A damaged line is a storage error, not
// something to skip quietly.
template <typename Fn>
void read_lines(const std::filesystem::path& path, Fn&& fn) {
  if (path.empty() || !std::filesystem::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot read", path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      fn(Json::parse(line));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kStorageIo,
                  path.string() + " line " + std::to_string(n) + " is corrupt: " + e.what(),
                  "", n);
    }
  }
}

}  // namespace

void append_line(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) io_error("cannot open", path);
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const auto n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int saved = errno;
      ::close(fd);
      errno = saved;
      io_error("cannot write", path);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int saved = errno;
    ::close(fd);
    errno = saved;
    io_error("cannot sync", path);
  }
  ::close(fd);
}

FeedbackStore::FeedbackStore(std::filesystem::path path) : path_(std::move(path)) {
  // Stored reports were checked on the way in; the future-date check is
  // disabled here so a clock set back does not brick the store.
  const auto far_future = Timestamp::max();
  read_lines(path_, [&](const Json& j) {
    auto r = recommend::feedback_from_json(j, far_future);
    reports_.emplace(r.bssid, std::move(r));
  });
}

void FeedbackStore::add(const recommend::FeedbackReport& report) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) append_line(path_, recommend::to_json(report).dump());
  reports_.emplace(report.bssid, report);
}

std::vector<recommend::FeedbackReport> FeedbackStore::for_bssid(const Bssid& bssid) const {
  std::lock_guard lock(mutex_);
  std::vector<recommend::FeedbackReport> out;
  auto [lo, hi] = reports_.equal_range(bssid);
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  return out;
}

std::size_t FeedbackStore::size() const {
  std::lock_guard lock(mutex_);
  return reports_.size();
}

ProbeStore::ProbeStore(std::filesystem::path path) : path_(std::move(path)) {
  read_lines(path_, [&](const Json& j) {
    auto r = probe::probe_result_from_json(j);
    latest_.insert_or_assign(r.bssid, std::move(r));
  });
}

void ProbeStore::put(const probe::ProbeResult& result) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) append_line(path_, probe::to_json(result).dump());
  latest_.insert_or_assign(result.bssid, result);
}

std::map<Bssid, probe::ProbeResult> ProbeStore::latest() const {
  std::lock_guard lock(mutex_);
  return latest_;
}

ScanStore::ScanStore(std::filesystem::path path) : path_(std::move(path)) {
  read_lines(path_, [&](const Json& j) {
    ingest::ScanBatch b;
    b.scan_id = j.at("scan_id").get<std::string>();
    b.ingested_at = parse_rfc3339(j.at("ingested_at").get<std::string>());
    for (const auto& o : j.at("observations")) b.observations.push_back(observation_from_json(o));
    scans_.emplace(b.scan_id, std::move(b));
  });
}

bool ScanStore::put(const ingest::ScanBatch& batch) {
  std::lock_guard lock(mutex_);
  if (scans_.count(batch.scan_id)) return false;
  if (!path_.empty()) {
    Json j;
    j["scan_id"] = batch.scan_id;
    j["ingested_at"] = format_rfc3339(batch.ingested_at);
    Json obs = Json::array();
    for (const auto& o : batch.observations) obs.push_back(observation_to_json(o));
    j["observations"] = std::move(obs);
    append_line(path_, j.dump());
  }
  scans_.emplace(batch.scan_id, batch);
  return true;
}

std::optional<ingest::ScanBatch> ScanStore::get(const std::string& scan_id) const {
  std::lock_guard lock(mutex_);
  auto it = scans_.find(scan_id);
  if (it == scans_.end()) return std::nullopt;
  return it->second;
}

}  // namespace wificue::service
