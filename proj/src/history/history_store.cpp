#include "wificue/history/history_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "wificue/core/error.hpp"

namespace wificue::history {
namespace {

bool record_order(const AccessPointObservation& a,
                  const AccessPointObservation& b) {
  return std::tie(a.observed_at, a.scanner_id) <
         std::tie(b.observed_at, b.scanner_id);
}

[[noreturn]] void io_error(const std::string& what,
                           const std::filesystem::path& path) {
  throw Error(ErrorCode::kStorageIo,
              what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(const std::filesystem::path& path, const std::string& data) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC,
                        0644);
  if (fd < 0) io_error("cannot open", path);
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

}  // namespace

std::string_view to_string(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::kSecurityChanged: return "SECURITY_CHANGED";
    case DeviationKind::kSsidChanged: return "SSID_CHANGED";
    case DeviationKind::kChannelChanged: return "CHANNEL_CHANGED";
  }
  return "UNKNOWN";
}

std::vector<Deviation> detect_deviations(const ApHistory& history,
                                         const AccessPointObservation& obs) {
  const auto& recs = history.records;
  auto end = std::lower_bound(
      recs.begin(), recs.end(), obs.observed_at,
      [](const AccessPointObservation& r, Timestamp t) { return r.observed_at < t; });
  if (end == recs.begin()) return {};
  const auto latest = std::prev(end);

  std::vector<Deviation> out;
  auto compare = [&](DeviationKind kind, auto&& value) {
    const auto before = value(*latest);
    const auto after = value(obs);
    if (before == after) return;
    auto run = latest;
    while (run != recs.begin() && value(*std::prev(run)) == before) --run;
    out.push_back({kind, before, after, run->observed_at, latest->observed_at,
                   obs.observed_at});
  };
  compare(DeviationKind::kSecurityChanged, [](const AccessPointObservation& r) {
    return std::string(to_string(r.security.security));
  });
  compare(DeviationKind::kSsidChanged,
          [](const AccessPointObservation& r) { return r.ssid.display(); });
  compare(DeviationKind::kChannelChanged, [](const AccessPointObservation& r) {
    return std::to_string(r.channel);
  });
  return out;
}

HistoryStore::HistoryStore(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) io_error("cannot open", path_);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();

  std::size_t complete = content.rfind('\n');
  complete = complete == std::string::npos ? 0 : complete + 1;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < complete) {
    const auto nl = content.find('\n', start);
    ++line_no;
    const std::string_view line(content.data() + start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    try {
      index(decode_observation(line, line_no));
    } catch (const Error& e) {
      throw Error(ErrorCode::kStorageIo,
                  "corrupt history store " + path_.string() + ": " + e.what(),
                  e.field(), line_no);
    }
  }
  if (complete < content.size()) {
    std::filesystem::resize_file(path_, complete, ec);
    if (ec) {
      throw Error(ErrorCode::kStorageIo,
                  "cannot truncate torn record in " + path_.string());
    }
  }
}

void HistoryStore::index(AccessPointObservation obs) {
  Key key{obs.bssid, obs.observed_at, obs.scanner_id};
  if (!keys_.insert(std::move(key)).second) return;
  auto& recs = by_bssid_[obs.bssid];
  recs.insert(std::upper_bound(recs.begin(), recs.end(), obs, record_order),
              std::move(obs));
  ++count_;
}

std::size_t HistoryStore::append(const ingest::ScanBatch& batch) {
  std::unique_lock lock(mutex_);
  std::vector<const AccessPointObservation*> fresh;
  std::set<Key> pending;
  for (const auto& obs : batch.observations) {
    Key key{obs.bssid, obs.observed_at, obs.scanner_id};
    if (keys_.count(key) || !pending.insert(key).second) continue;
    fresh.push_back(&obs);
  }
  if (fresh.empty()) return 0;
  if (!path_.empty()) {
    std::string data;
    for (const auto* obs : fresh) {
      data += encode_observation(*obs);
      data += '\n';
    }
    write_all(path_, data);
  }
  for (const auto* obs : fresh) index(*obs);
  return fresh.size();
}

ApHistory HistoryStore::history(const Bssid& bssid) const {
  std::shared_lock lock(mutex_);
  ApHistory h{bssid, {}};
  if (auto it = by_bssid_.find(bssid); it != by_bssid_.end()) {
    h.records = it->second;
  }
  return h;
}

HistoryPage HistoryStore::page(const Bssid& bssid, std::size_t limit,
                               std::size_t offset) const {
  std::shared_lock lock(mutex_);
  HistoryPage p{bssid, 0, limit, offset, {}};
  auto it = by_bssid_.find(bssid);
  if (it == by_bssid_.end()) return p;
  const auto& recs = it->second;
  p.total = recs.size();
  for (std::size_t i = offset; i < recs.size() && p.records.size() < limit; ++i) {
    p.records.push_back(recs[recs.size() - 1 - i]);
  }
  return p;
}

std::map<Bssid, ApHistory> HistoryStore::snapshot() const {
  std::shared_lock lock(mutex_);
  std::map<Bssid, ApHistory> out;
  for (const auto& [bssid, recs] : by_bssid_) out.emplace(bssid, ApHistory{bssid, recs});
  return out;
}

std::size_t HistoryStore::record_count() const {
  std::shared_lock lock(mutex_);
  return count_;
}

}  // namespace wificue::history
