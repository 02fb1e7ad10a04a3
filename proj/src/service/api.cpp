#include "wificue/service/api.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <openssl/crypto.h>

#include "wificue/core/error.hpp"

namespace wificue::service {
namespace {

Response json_response(int status, const Json& body) { return {status, body.dump()}; }

Response error_response(int status, std::string_view code, const std::string& message,
                        const Json& details = nullptr) {
  return {status, error_body(code, message, details)};
}

Response from_error(const Error& e) {
  Json details = nullptr;
  if (!e.field().empty() || e.line() > 0) {
    details = Json::object();
    if (!e.field().empty()) details["field"] = e.field();
    if (e.line() > 0) details["line"] = e.line();
  }
  switch (e.code()) {
    case ErrorCode::kSchemaViolation:
    case ErrorCode::kFutureTimestamp:
      return error_response(400, to_string(e.code()), e.what(), details);
    case ErrorCode::kMalformed:
    case ErrorCode::kMulticastAddress:
      return error_response(400, "BAD_REQUEST", e.what(), details);
    case ErrorCode::kStorageIo:
      return error_response(500, "STORAGE_IO", e.what(), details);
    default:
      return error_response(500, "INTERNAL", e.what(), details);
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::optional<std::size_t> parse_count(const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::optional<Json> parse_body(const std::string& body) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

std::optional<std::string> read_baseline(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) return std::nullopt;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read baseline " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Parse>
auto validate_baseline(const std::string& body, const std::filesystem::path& file, Parse parse) {
  const Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kConfigError, "baseline " + file.string() + " is not valid JSON");
  }
  try {
    return parse(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, "baseline " + file.string() + ": " + e.what());
  }
}

}  // namespace

std::string error_body(std::string_view code, const std::string& message, const Json& details) {
  Json err;
  err["code"] = code;
  err["message"] = message;
  if (!details.is_null()) err["details"] = details;
  Json j;
  j["error"] = std::move(err);
  return j.dump();
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  if (options_.baselines_dir) {
    const auto dns_file = *options_.baselines_dir / "dns.json";
    const auto tls_file = *options_.baselines_dir / "tls.json";
    if (!std::filesystem::is_directory(*options_.baselines_dir)) {
      throw Error(ErrorCode::kConfigError,
                  "baselines directory " + options_.baselines_dir->string() + " not found");
    }
    dns_body_ = read_baseline(dns_file);
    tls_body_ = read_baseline(tls_file);
    if (dns_body_) dns_ = validate_baseline(*dns_body_, dns_file, probe::dns_baseline_from_json);
    if (tls_body_) tls_ = validate_baseline(*tls_body_, tls_file, probe::tls_pins_from_json);
  }
  workspace_ = open_workspace(options_.workspace);
}

Service::~Service() { stop(); }

Response Service::handle(const Request& r) {
  try {
    if (options_.api_token) {
      const auto it = r.headers.find("authorization");
      const std::string expected = "Bearer " + *options_.api_token;
      const bool ok = it != r.headers.end() && it->second.size() == expected.size() &&
                      CRYPTO_memcmp(it->second.data(), expected.data(), expected.size()) == 0;
      if (!ok) return error_response(401, "UNAUTHORIZED", "missing or invalid bearer token");
    }
    if (r.body.size() > kMaxBodyBytes) {
      return error_response(413, "TOO_LARGE", "request body exceeds 5 MB");
    }

    const auto parts = split_path(r.path);
    auto route = [&](std::size_t n, std::string_view method) {
      return parts.size() == n && r.method == method;
    };
    auto method_not_allowed = [&] {
      return error_response(405, "METHOD_NOT_ALLOWED", r.method + " not allowed on " + r.path);
    };
    if (parts.size() < 2 || parts[0] != "v1") {
      return error_response(404, "NOT_FOUND", "no route for " + r.path);
    }
    const auto& top = parts[1];
    if (top == "scans" && parts.size() == 2) {
      return route(2, "POST") ? post_scans(r) : method_not_allowed();
    }
    if (top == "scans" && parts.size() == 4 && parts[3] == "assessment") {
      return route(4, "GET") ? get_assessment(r, parts[2]) : method_not_allowed();
    }
    if (top == "aps" && parts.size() == 4 && parts[3] == "history") {
      return route(4, "GET") ? get_history(r, parts[2]) : method_not_allowed();
    }
    if (top == "feedback" && parts.size() == 2) {
      return route(2, "POST") ? post_feedback(r) : method_not_allowed();
    }
    if (top == "baselines" && parts.size() == 3 && (parts[2] == "dns" || parts[2] == "tls")) {
      if (!route(3, "GET")) return method_not_allowed();
      return get_baseline(parts[2] == "dns" ? dns_body_ : tls_body_);
    }
    if (top == "probes" && parts.size() == 2) {
      return route(2, "POST") ? post_probe(r) : method_not_allowed();
    }
    if (top == "wigle" && parts.size() == 3) {
      return route(3, "GET") ? get_wigle(parts[2]) : method_not_allowed();
    }
    return error_response(404, "NOT_FOUND", "no route for " + r.path);
  } catch (const Error& e) {
    return from_error(e);
  } catch (const std::exception& e) {
    return error_response(500, "INTERNAL", e.what());
  }
}

Response Service::post_scans(const Request& r) {
  const auto body = parse_body(r.body);
  if (!body) return error_response(400, "BAD_REQUEST", "body is not valid JSON");
  if (!body->is_array()) {
    return error_response(400, "SCHEMA_VIOLATION", "body must be an array of observations");
  }
  if (body->empty()) return error_response(400, "SCHEMA_VIOLATION", "empty batch");

  const Timestamp now = workspace_->clock();
  ingest::ScanBatch batch;
  batch.ingested_at = now;
  std::size_t index = 0;
  for (const auto& item : *body) {
    batch.observations.push_back(observation_from_json(item, ++index, now));
  }
  batch = ingest::normalize(std::move(batch));
  batch.scan_id = scan_id_for(batch);

  std::size_t appended = 0;
  {
    std::lock_guard lock(write_mutex_);
    workspace_->scans->put(batch);
    appended = workspace_->history->append(batch);
  }
  Json out;
  out["scan_id"] = batch.scan_id;
  out["accepted"] = appended;
  out["skipped"] = body->size() - appended;
  return json_response(200, out);
}

Response Service::get_assessment(const Request& r, const std::string& scan_id) {
  auto posture = recommend::RiskPosture::kBalanced;
  if (auto it = r.query.find("posture"); it != r.query.end()) {
    const auto parsed = recommend::posture_from_string(it->second);
    if (!parsed) {
      return error_response(400, "BAD_REQUEST", "unknown posture '" + it->second + "'",
                            Json{{"field", "posture"}});
    }
    posture = *parsed;
  }
  const auto batch = workspace_->scans->get(scan_id);
  if (!batch) return error_response(404, "NOT_FOUND", "unknown scan " + scan_id);
  return json_response(200, assessment_document(*workspace_, *batch, posture));
}

Response Service::get_history(const Request& r, const std::string& bssid_text) {
  const Bssid bssid = parse_bssid(bssid_text);
  std::size_t limit = 50, offset = 0;
  for (auto [name, target] : {std::pair{"limit", &limit}, std::pair{"offset", &offset}}) {
    auto it = r.query.find(name);
    if (it == r.query.end()) continue;
    auto v = parse_count(it->second);
    if (!v || (std::string_view(name) == "limit" && *v > 1000)) {
      return error_response(400, "BAD_REQUEST",
                            std::string(name) + " must be an integer in range",
                            Json{{"field", name}});
    }
    *target = *v;
  }
  const auto page = workspace_->history->page(bssid, limit, offset);
  Json out;
  out["bssid"] = page.bssid.to_string();
  out["total"] = page.total;
  out["limit"] = page.limit;
  out["offset"] = page.offset;
  Json records = Json::array();
  for (const auto& o : page.records) records.push_back(observation_to_json(o));
  out["records"] = std::move(records);
  return json_response(200, out);
}

Response Service::post_feedback(const Request& r) {
  const auto body = parse_body(r.body);
  if (!body) return error_response(400, "BAD_REQUEST", "body is not valid JSON");
  const auto report = recommend::feedback_from_json(*body, workspace_->clock());
  {
    std::lock_guard lock(write_mutex_);
    workspace_->feedback->add(report);
  }
  return json_response(200, Json{{"accepted", true}});
}

Response Service::get_baseline(const std::optional<std::string>& body) {
  if (!body) return error_response(404, "NOT_FOUND", "baseline not configured");
  return {200, *body};
}

Response Service::post_probe(const Request& r) {
  const auto body = parse_body(r.body);
  if (!body) return error_response(400, "BAD_REQUEST", "body is not valid JSON");
  const auto result = probe::probe_result_from_json(*body);
  probe::check_coverage(result, dns_ ? &*dns_ : nullptr, tls_ ? &*tls_ : nullptr);
  {
    std::lock_guard lock(write_mutex_);
    workspace_->probes->put(result);
  }
  Json flags = Json::array();
  for (const auto& f : probe::probe_flags(result)) flags.push_back(flag_to_json(f));
  return json_response(200, Json{{"flags", std::move(flags)}});
}

Response Service::get_wigle(const std::string& bssid_text) {
  return json_response(200, wigle_document(*workspace_, parse_bssid(bssid_text)));
}

bool Service::listen(const std::string& host, int port, const std::function<void(int)>& on_bound) {
  {
    std::lock_guard lock(server_mutex_);
    server_ = std::make_unique<httplib::Server>();
    // Oversized bodies are refused by handle() with the 5 MB limit; this
    // only bounds what httplib will buffer.
    server_->set_payload_max_length(kMaxBodyBytes * 4);
    // Catch-all handlers rather than a pre-routing hook: httplib reads the
    // request body only for routed handlers.
    const auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
      Request r;
      r.method = req.method;
      r.path = req.path;
      for (const auto& [k, v] : req.params) r.query.emplace(k, v);
      for (const auto& [k, v] : req.headers) {
        std::string key = k;
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        r.headers.emplace(std::move(key), v);
      }
      r.body = req.body;
      const auto out = handle(r);
      res.status = out.status;
      res.set_content(out.body, "application/json");
    };
    server_->Get(".*", adapt);
    server_->Post(".*", adapt);
    server_->Put(".*", adapt);
    server_->Patch(".*", adapt);
    server_->Delete(".*", adapt);
    server_->Options(".*", adapt);
    server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const std::string code = res.status == 413 ? "TOO_LARGE" : "BAD_REQUEST";
      res.set_content(error_body(code, httplib::status_message(res.status)),
                      "application/json");
    });
  }
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) return false;
  } else if (!server_->bind_to_port(host, port)) {
    return false;
  }
  if (on_bound) on_bound(bound);
  return server_->listen_after_bind();
}

void Service::stop() {
  std::lock_guard lock(server_mutex_);
  if (server_) server_->stop();
}

}  // namespace wificue::service
