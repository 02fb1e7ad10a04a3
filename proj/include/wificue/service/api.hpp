#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "wificue/probe/probe.hpp"
#include "wificue/service/workspace.hpp"

namespace httplib {
class Server;
}

namespace wificue::service {

inline constexpr std::size_t kMaxBodyBytes = 5 * 1024 * 1024;

struct ServiceOptions {
  WorkspaceOptions workspace;
  // Directory holding dns.json and/or tls.json. Each file present is
  // validated at startup and then served verbatim.
  std::optional<std::filesystem::path> baselines_dir;
  // When set, every request needs "Authorization: Bearer <token>".
  std::optional<std::string> api_token;
};

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
};

// {"error": {"code", "message"[, "details"]}}
std::string error_body(std::string_view code, const std::string& message,
                       const Json& details = nullptr);

// The HTTP API as a plain function of the request, plus an httplib adapter.
// Thread-safe: writes are serialized, reads run concurrently.
class Service {
 public:
  // Throws Error(kConfigError) for a malformed baseline file, and whatever
  // open_workspace throws.
  explicit Service(ServiceOptions options);
  ~Service();

  Response handle(const Request& request);

  // Binds and serves until stop(). `on_bound` receives the actual port
  // (useful with port 0) before the first request is accepted. Returns false
  // when the address cannot be bound.
  bool listen(const std::string& host, int port,
              const std::function<void(int)>& on_bound = {});
  void stop();

  Workspace& workspace() { return *workspace_; }

 private:
  Response post_scans(const Request& r);
  Response get_assessment(const Request& r, const std::string& scan_id);
  Response get_history(const Request& r, const std::string& bssid);
  Response post_feedback(const Request& r);
  Response get_baseline(const std::optional<std::string>& body);
  Response post_probe(const Request& r);
  Response get_wigle(const std::string& bssid);

  ServiceOptions options_;
  std::unique_ptr<Workspace> workspace_;
  std::optional<std::string> dns_body_, tls_body_;
  std::optional<probe::DnsBaseline> dns_;
  std::optional<probe::TlsPinSet> tls_;
  std::mutex write_mutex_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex server_mutex_;
};

}  // namespace wificue::service
