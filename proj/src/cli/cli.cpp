#include "wificue/cli/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"
#include "wificue/ingest/scan_ingest.hpp"
#include "wificue/oui/registry.hpp"
#include "wificue/probe/system_transports.hpp"
#include "wificue/service/api.hpp"
#include "wificue/service/workspace.hpp"

namespace wificue::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for problems the user fixes by changing the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

service::Clock make_clock(const std::string& now_text) {
  if (now_text.empty()) return now_utc;
  const auto t = try_parse_rfc3339(now_text);
  if (!t) throw UsageError("--now must be an RFC 3339 timestamp");
  return [t = *t] { return t; };
}

std::string require_db(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (auto e = env("WIFICUE_DB")) return *e;
  throw UsageError("no store given: pass --db or set WIFICUE_DB");
}

std::string db_or_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  return env("WIFICUE_DB").value_or("");
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

ingest::ParseResult read_scan(const std::string& file, const std::string& format,
                              const std::string& scanner_id, ingest::ParseMode mode,
                              Timestamp now) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageIo, "cannot open " + file);
  if (format == "airodump") {
    ingest::AirodumpOptions opts;
    if (!scanner_id.empty()) opts.scanner_id = scanner_id;
    opts.mode = mode;
    return ingest::parse_airodump_csv(in, opts);
  }
  return ingest::parse_canonical(in, mode, now);
}

void print_table(std::ostream& out, const Json& doc) {
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %7s  %-24s %-17s  %s\n", "VERDICT", "SCORE", "SSID",
                "BSSID", "FLAGS");
  out << line;
  for (const auto& row : doc) {
    std::string flags;
    std::size_t n = 0;
    for (const auto& f : row["flags"]) {
      if (n++ == 3) {
        flags += ",...";
        break;
      }
      flags += (flags.empty() ? "" : ",") + f["code"].get<std::string>();
    }
    std::string ssid = row["ssid"].get<std::string>();
    if (ssid.empty()) ssid = "<hidden>";
    std::snprintf(line, sizeof line, "%-10s %7.2f  %-24s %-17s  %s\n",
                  row["verdict"]["decision"].get<std::string>().c_str(),
                  row["verdict"]["score"].get<double>(), ssid.c_str(),
                  row["bssid"].get<std::string>().c_str(), flags.c_str());
    out << line;
  }
}

int cmd_ingest(const std::string& format, const std::string& file, const std::string& db_flag,
               const std::string& scanner_id, const std::string& now_text, std::ostream& out,
               std::ostream& err) {
  const auto clock = make_clock(now_text);
  const auto db = require_db(db_flag);
  const Timestamp now = clock();
  const auto parsed = read_scan(file, format, scanner_id, ingest::ParseMode::kLenient, now);
  for (const auto& e : parsed.errors) {
    err << "skipped line " << e.line << " (" << e.field << "): " << e.message << "\n";
  }
  ingest::ScanBatch batch{"", parsed.observations, now};
  batch = ingest::normalize(std::move(batch));
  batch.scan_id = service::scan_id_for(batch);

  history::HistoryStore store(service::db_paths(db).history);
  service::ScanStore scans(service::db_paths(db).scans);
  std::size_t appended = 0;
  if (!batch.observations.empty()) {
    scans.put(batch);
    appended = store.append(batch);
  }
  const std::size_t total = parsed.observations.size() + parsed.skipped;
  out << "accepted " << appended << " skipped " << (total - appended) << "\n";
  if (!batch.observations.empty()) err << "scan_id " << batch.scan_id << "\n";
  return kExitOk;
}

struct AssessArgs {
  std::string file, format = "canonical", posture = "balanced", output = "table";
  std::string db, oui, deny_list, wigle_fixtures, config, now;
};

int cmd_assess(const AssessArgs& a, std::ostream& out, std::ostream&) {
  const auto clock = make_clock(a.now);
  const auto posture = recommend::posture_from_string(a.posture);
  if (!posture) throw UsageError("unknown posture " + a.posture);
  const Timestamp now = clock();
  const auto parsed = read_scan(a.file, a.format, "", ingest::ParseMode::kStrict, now);
  if (parsed.observations.empty()) throw UsageError("scan file " + a.file + " is empty");

  service::WorkspaceOptions wo;
  wo.db = db_or_env(a.db);
  wo.oui = opt_path(a.oui);
  wo.deny_list = opt_path(a.deny_list);
  wo.wigle_fixtures = opt_path(a.wigle_fixtures);
  wo.scoring_config = opt_path(a.config);
  wo.wigle_api_name = env("WIFICUE_WIGLE_API_NAME");
  wo.wigle_api_token = env("WIFICUE_WIGLE_API_TOKEN");
  wo.clock = clock;
  const auto ws = service::open_workspace(wo);

  auto batch = ingest::normalize(ingest::ScanBatch{"", parsed.observations, now});
  batch.scan_id = service::scan_id_for(batch);
  const Json doc = service::assessment_document(*ws, batch, *posture);
  if (a.output == "json") {
    out << doc.dump();
  } else {
    print_table(out, doc);
  }
  for (const auto& row : doc) {
    if (row["verdict"]["decision"] == "AVOID") return kExitAvoid;
  }
  return kExitOk;
}

struct ServeArgs {
  std::string listen = "127.0.0.1:8080";
  std::string db, baselines, wigle_fixtures, oui, deny_list, config, now;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  const auto colon = a.listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen must be host:port");
  const std::string host = a.listen.substr(0, colon);
  int port = -1;
  try {
    port = std::stoi(a.listen.substr(colon + 1));
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) throw UsageError("--listen port out of range");

  service::ServiceOptions so;
  so.workspace.db = require_db(a.db);
  so.workspace.oui = opt_path(a.oui);
  so.workspace.deny_list = opt_path(a.deny_list);
  so.workspace.wigle_fixtures = opt_path(a.wigle_fixtures);
  so.workspace.scoring_config = opt_path(a.config);
  so.workspace.wigle_api_name = env("WIFICUE_WIGLE_API_NAME");
  so.workspace.wigle_api_token = env("WIFICUE_WIGLE_API_TOKEN");
  so.workspace.clock = make_clock(a.now);
  so.baselines_dir = opt_path(a.baselines);
  so.api_token = env("WIFICUE_API_TOKEN");
  service::Service svc(std::move(so));

  // SIGINT/SIGTERM are taken synchronously by one thread, which stops the
  // server; the pool threads inherit the blocked mask.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    svc.stop();
  });

  const bool ok = svc.listen(host, port, [&](int bound) {
    out << "listening on http://" << host << ":" << bound << std::endl;
  });
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  if (!ok) {
    err << "error: cannot listen on " << a.listen << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct ProbeArgs {
  std::string bssid, baselines, output = "json", portal_url, submit, now;
  bool acknowledged = false;
};

int cmd_probe(const ProbeArgs& a, std::ostream& out, std::ostream& err) {
  err << probe::kProbeWarning << "\n";
  if (!a.acknowledged) {
    err << "Refusing to probe without --i-understand-the-risk.\n";
    return kExitUsage;
  }
  const auto clock = make_clock(a.now);
  const Bssid bssid = parse_bssid(a.bssid);

  std::optional<probe::DnsBaseline> dns;
  std::optional<probe::TlsPinSet> tls;
  auto load = [&](const fs::path& file) -> std::optional<Json> {
    if (!fs::exists(file)) return std::nullopt;
    std::ifstream in(file);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kConfigError, file.string() + " is not JSON");
    return j;
  };
  if (auto j = load(fs::path(a.baselines) / "dns.json")) dns = probe::dns_baseline_from_json(*j);
  if (auto j = load(fs::path(a.baselines) / "tls.json")) tls = probe::tls_pins_from_json(*j);
  if (!dns && !tls) {
    throw Error(ErrorCode::kConfigError, "no dns.json or tls.json in " + a.baselines);
  }

  probe::ProbeTargets targets;
  targets.dns = dns ? &*dns : nullptr;
  targets.tls = tls ? &*tls : nullptr;
  targets.portal_url = a.portal_url.empty() ? std::string(probe::kDefaultPortalUrl) : a.portal_url;
  probe::SystemResolver resolver;
  probe::OpenSslTlsConnector connector;
  probe::HttplibFetcher fetcher;
  const auto result = probe::run_probe(bssid, clock(), targets, resolver, connector, fetcher);
  const auto flags = probe::probe_flags(result);

  if (a.output == "json") {
    out << probe::to_json(result).dump() << "\n";
  } else {
    for (const auto& d : result.dns) out << "dns  " << d.domain << " " << to_string(d.verdict) << "\n";
    for (const auto& t : result.tls) {
      out << "tls  " << t.host << ":" << t.port << " " << to_string(t.verdict) << "\n";
    }
    out << "portal " << to_string(result.portal.verdict) << "\n";
  }
  for (const auto& f : flags) err << "flag " << to_string(f.level) << " " << f.code << "\n";

  if (!a.submit.empty()) {
    httplib::Client client(a.submit);
    httplib::Headers headers;
    if (auto token = env("WIFICUE_API_TOKEN")) headers.emplace("Authorization", "Bearer " + *token);
    auto res = client.Post("/v1/probes", headers, probe::to_json(result).dump(), "application/json");
    if (!res) {
      err << "error: submit failed: " << httplib::to_string(res.error()) << "\n";
      return kExitRuntime;
    }
    if (res->status != 200) {
      err << "error: submit returned " << res->status << ": " << res->body << "\n";
      return kExitRuntime;
    }
  }
  return kExitOk;
}

int cmd_oui_update(const std::string& file, const std::string& db_flag, std::ostream& out) {
  const auto registry = oui::load_registry_file(file);
  const auto db = db_or_env(db_flag);
  if (!db.empty()) {
    const auto target = service::db_paths(db).registry;
    const fs::path tmp = target.string() + ".tmp";
    std::error_code ec;
    fs::copy_file(file, tmp, fs::copy_options::overwrite_existing, ec);
    if (!ec) fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::kStorageIo, "cannot install registry: " + ec.message());
  }
  out << "entries " << registry.size() << " source_version " << registry.source_version() << "\n";
  return kExitOk;
}

struct FeedbackArgs {
  std::string bssid, category, ssid, reporter = "cli", observed_at, db, now;
};

int cmd_feedback_add(const FeedbackArgs& a, std::ostream& out) {
  const auto clock = make_clock(a.now);
  const Timestamp now = clock();
  Json j;
  j["bssid"] = a.bssid;
  j["ssid"] = a.ssid;
  j["category"] = a.category;
  j["observed_at"] = a.observed_at.empty() ? format_rfc3339(now) : a.observed_at;
  j["reporter_id"] = a.reporter;
  recommend::FeedbackReport report;
  try {
    report = recommend::feedback_from_json(j, now);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaViolation || e.code() == ErrorCode::kFutureTimestamp)
      throw UsageError(e.what());
    throw;
  }
  service::FeedbackStore store(service::db_paths(require_db(a.db)).feedback);
  store.add(report);
  out << "accepted " << recommend::to_json(report).dump() << "\n";
  return kExitOk;
}

int cmd_wigle_lookup(const std::string& bssid_text, const std::string& fixtures,
                     const std::string& db_flag, const std::string& now_text, std::ostream& out) {
  const Bssid bssid = parse_bssid(bssid_text);
  service::WorkspaceOptions wo;
  wo.db = db_or_env(db_flag);
  wo.wigle_fixtures = opt_path(fixtures);
  wo.wigle_api_name = env("WIFICUE_WIGLE_API_NAME");
  wo.wigle_api_token = env("WIFICUE_WIGLE_API_TOKEN");
  wo.clock = make_clock(now_text);
  if (!wo.wigle_fixtures && !(wo.wigle_api_name && wo.wigle_api_token)) {
    throw Error(ErrorCode::kConfigError,
                "set WIFICUE_WIGLE_API_NAME and WIFICUE_WIGLE_API_TOKEN, or pass "
                "--offline-fixtures");
  }
  auto ws = service::open_workspace(wo);
  const Json doc = service::wigle_document(*ws, bssid);
  out << doc.dump() << "\n";
  return doc["status"] == "WIGLE_UNAVAILABLE" ? kExitRuntime : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wificue: Wi-Fi access point risk assessment", "wificue"};
  app.require_subcommand(1);
  const std::string now_help = "Pin the clock (RFC 3339), for reproducible runs";

  // ingest
  std::string in_format = "canonical", in_file, in_db, in_scanner, in_now;
  auto* ingest = app.add_subcommand("ingest", "Parse a scan file and append it to the store");
  ingest->add_option("--format", in_format, "canonical | airodump (airodump times are UTC)")
      ->check(CLI::IsMember({"canonical", "airodump"}));
  ingest->add_option("file", in_file, "Scan file")->required();
  ingest->add_option("--db", in_db, "History store (default $WIFICUE_DB)");
  ingest->add_option("--scanner-id", in_scanner, "scanner_id for airodump rows");
  ingest->add_option("--now", in_now, now_help)->group("");

  // assess
  AssessArgs as;
  auto* assess = app.add_subcommand("assess", "Assess a scan file without the service");
  assess->add_option("file", as.file, "Scan file")->required();
  assess->add_option("--format", as.format, "canonical | airodump")
      ->check(CLI::IsMember({"canonical", "airodump"}));
  assess->add_option("--posture", as.posture, "conservative | balanced | permissive")
      ->check(CLI::IsMember({"conservative", "balanced", "permissive"}, CLI::ignore_case));
  assess->add_option("--output", as.output, "table | json (json is the stable format)")
      ->check(CLI::IsMember({"table", "json"}));
  assess->add_option("--db", as.db, "History store (default $WIFICUE_DB)");
  assess->add_option("--oui", as.oui, "manuf registry file (default <db>.manuf)");
  assess->add_option("--deny-list", as.deny_list, "OUI deny list (default <db>.denylist)");
  assess->add_option("--wigle-fixtures", as.wigle_fixtures, "Recorded WIGLE responses");
  assess->add_option("--config", as.config, "Scoring configuration JSON");
  assess->add_option("--now", as.now, now_help)->group("");

  // serve
  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--listen", sv.listen, "host:port (port 0 picks a free port)");
  serve->add_option("--db", sv.db, "History store (default $WIFICUE_DB)");
  serve->add_option("--baselines", sv.baselines, "Directory with dns.json / tls.json");
  serve->add_option("--wigle-fixtures", sv.wigle_fixtures, "Recorded WIGLE responses");
  serve->add_option("--oui", sv.oui, "manuf registry file (default <db>.manuf)");
  serve->add_option("--deny-list", sv.deny_list, "OUI deny list (default <db>.denylist)");
  serve->add_option("--config", sv.config, "Scoring configuration JSON");
  serve->add_option("--now", sv.now, now_help)->group("");

  // probe
  ProbeArgs pr;
  auto* probe_cmd = app.add_subcommand("probe", "Post-connection DNS/TLS/portal checks");
  probe_cmd->add_option("--bssid", pr.bssid, "BSSID of the AP you are connected to")->required();
  probe_cmd->add_option("--baselines", pr.baselines, "Directory with dns.json / tls.json")
      ->required();
  probe_cmd->add_option("--output", pr.output, "json | table")
      ->check(CLI::IsMember({"table", "json"}));
  probe_cmd->add_option("--portal-url", pr.portal_url, "Captive-portal check URL (expects 204)");
  probe_cmd->add_option("--submit", pr.submit, "Service base URL to POST the result to");
  probe_cmd->add_flag("--i-understand-the-risk", pr.acknowledged,
                      "Acknowledge that connecting to the AP is itself a risk");
  probe_cmd->add_option("--now", pr.now, now_help)->group("");

  // oui update
  std::string oui_file, oui_db;
  auto* oui_cmd = app.add_subcommand("oui", "Vendor registry");
  oui_cmd->require_subcommand(1);
  auto* oui_update = oui_cmd->add_subcommand("update", "Validate and install a manuf file");
  oui_update->add_option("--file", oui_file, "manuf file")->required();
  oui_update->add_option("--db", oui_db, "Store to install beside (default $WIFICUE_DB)");

  // feedback add
  FeedbackArgs fb;
  auto* fb_cmd = app.add_subcommand("feedback", "Community feedback");
  fb_cmd->require_subcommand(1);
  auto* fb_add = fb_cmd->add_subcommand("add", "Record how a connection went");
  fb_add->add_option("--bssid", fb.bssid)->required();
  fb_add->add_option("--category", fb.category,
                     "NO_INTERNET | APP_FAILURE | PORTAL_HIJACK | CERT_WARNING | SLOW | WORKED_OK")
      ->required();
  fb_add->add_option("--ssid", fb.ssid);
  fb_add->add_option("--reporter", fb.reporter, "Opaque reporter id");
  fb_add->add_option("--observed-at", fb.observed_at, "RFC 3339 (default now)");
  fb_add->add_option("--db", fb.db, "History store (default $WIFICUE_DB)");
  fb_add->add_option("--now", fb.now, now_help)->group("");

  // wigle lookup
  std::string wl_bssid, wl_fixtures, wl_db, wl_now;
  auto* wigle_cmd = app.add_subcommand("wigle", "WIGLE network database");
  wigle_cmd->require_subcommand(1);
  auto* wl = wigle_cmd->add_subcommand("lookup", "Look up one BSSID");
  wl->add_option("--bssid", wl_bssid)->required();
  wl->add_option("--offline-fixtures", wl_fixtures, "Recorded responses instead of the API");
  wl->add_option("--db", wl_db, "Store for history comparison and cache");
  wl->add_option("--now", wl_now, now_help)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(in_format, in_file, in_db, in_scanner, in_now, out, err);
    if (*assess) return cmd_assess(as, out, err);
    if (*serve) return cmd_serve(sv, out, err);
    if (*probe_cmd) return cmd_probe(pr, out, err);
    if (*oui_update) return cmd_oui_update(oui_file, oui_db, out);
    if (*fb_add) return cmd_feedback_add(fb, out);
    if (*wl) return cmd_wigle_lookup(wl_bssid, wl_fixtures, wl_db, wl_now, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace wificue::cli
