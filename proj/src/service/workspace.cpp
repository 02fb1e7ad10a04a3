#include "wificue/service/workspace.hpp"

#include <algorithm>
#include <set>

#include "wificue/core/encoding.hpp"
#include "wificue/core/error.hpp"

namespace wificue::service {
namespace {

std::filesystem::path beside(const std::filesystem::path& db, const std::string& suffix) {
  if (db.empty()) return {};
  return db.string() + suffix;
}

Json vendor_to_json(const oui::VendorMatch& m) {
  Json j;
  j["matched"] = m.matched;
  j["prefix_len"] = m.prefix_len;
  j["short_name"] = m.short_name;
  j["long_name"] = m.long_name;
  return j;
}

Json detail_to_json(const wigle::WigleDetail& d) {
  Json j;
  j["netid"] = d.netid.to_string();
  j["ssid"] = d.ssid;
  j["encryption"] = d.encryption;
  j["trilat"] = d.trilat;
  j["trilong"] = d.trilong;
  j["lastupdt"] = d.lastupdt ? Json(format_rfc3339(*d.lastupdt)) : Json(nullptr);
  return j;
}

}  // namespace

DbPaths db_paths(const std::filesystem::path& db) {
  return DbPaths{db,
                 beside(db, ".feedback.jsonl"),
                 beside(db, ".probes.jsonl"),
                 beside(db, ".scans.jsonl"),
                 beside(db, ".wigle-cache.json"),
                 beside(db, ".manuf"),
                 beside(db, ".denylist")};
}

std::unique_ptr<Workspace> open_workspace(const WorkspaceOptions& options) {
  auto ws = std::make_unique<Workspace>();
  ws->clock = options.clock ? options.clock : Clock(now_utc);
  ws->paths = db_paths(options.db);
  ws->history = std::make_unique<history::HistoryStore>(ws->paths.history);
  ws->feedback = std::make_unique<FeedbackStore>(ws->paths.feedback);
  ws->probes = std::make_unique<ProbeStore>(ws->paths.probes);
  ws->scans = std::make_unique<ScanStore>(ws->paths.scans);

  auto registry_path = options.oui;
  if (!registry_path && !ws->paths.registry.empty() &&
      std::filesystem::exists(ws->paths.registry)) {
    registry_path = ws->paths.registry;
  }
  if (registry_path) {
    ws->registry = std::make_shared<const oui::OuiRegistry>(
        oui::load_registry_file(registry_path->string(), oui::LoadMode::kStrict, ws->clock()));
  }

  auto deny_path = options.deny_list;
  if (!deny_path && !ws->paths.deny_list.empty() &&
      std::filesystem::exists(ws->paths.deny_list)) {
    deny_path = ws->paths.deny_list;
  }
  if (deny_path) ws->deny_list = oui::load_deny_list_file(deny_path->string());

  if (options.scoring_config) {
    ws->scoring = recommend::load_scoring_config(options.scoring_config->string());
  }

  if (options.wigle_fixtures) {
    if (!std::filesystem::is_directory(*options.wigle_fixtures)) {
      throw Error(ErrorCode::kConfigError,
                  "WIGLE fixture directory " + options.wigle_fixtures->string() + " not found");
    }
    wigle::WigleClientConfig cfg;
    cfg.mode = wigle::WigleMode::kFixture;
    cfg.fixture_dir = *options.wigle_fixtures;
    ws->wigle = std::make_unique<wigle::WigleClient>(cfg, nullptr, ws->clock);
  } else if (options.wigle_api_name && options.wigle_api_token) {
    wigle::WigleClientConfig cfg;
    cfg.mode = wigle::WigleMode::kLive;
    cfg.cache_path = ws->paths.wigle_cache;
    ws->wigle = std::make_unique<wigle::WigleClient>(
        cfg,
        std::make_shared<wigle::HttpsWigleTransport>(*options.wigle_api_name,
                                                     *options.wigle_api_token),
        ws->clock);
  }
  return ws;
}

std::string scan_id_for(const ingest::ScanBatch& normalized) {
  std::string text;
  for (const auto& o : normalized.observations) {
    text += encode_observation(o);
    text += '\n';
  }
  return "scan-" + fnv1a64_hex(text);
}

risk::RuleContext build_context(const Workspace& ws, const ingest::ScanBatch& batch) {
  risk::RuleContext ctx;
  ctx.batch = batch;
  ctx.registry = ws.registry.get();
  ctx.deny_list = ws.deny_list;
  const auto probes = ws.probes->latest();
  for (const auto& obs : batch.observations) {
    ctx.histories.emplace(obs.bssid, ws.history->history(obs.bssid));
    if (auto it = probes.find(obs.bssid); it != probes.end()) {
      ctx.probes.emplace(obs.bssid, it->second);
    }
    if (!ws.wigle) continue;
    risk::WigleOutcome outcome;
    try {
      auto known = ws.wigle->peek(obs.bssid);
      if (!known) continue;  // live mode, nothing cached yet
      outcome.finding = wigle::compare(*known, obs);
    } catch (const Error& e) {
      outcome.error = e.code();
      outcome.error_message = e.what();
    }
    ctx.wigle.emplace(obs.bssid, std::move(outcome));
  }
  // Other APs sharing an SSID with the batch matter to the twin rule.
  std::set<Ssid> ssids;
  for (const auto& obs : batch.observations) {
    if (!obs.ssid.hidden()) ssids.insert(obs.ssid);
  }
  if (!ssids.empty()) {
    for (auto& [bssid, h] : ws.history->snapshot()) {
      if (ctx.histories.count(bssid)) continue;
      const bool shares = std::any_of(h.records.begin(), h.records.end(), [&](const auto& r) {
        return ssids.count(r.ssid) > 0;
      });
      if (shares) ctx.histories.emplace(bssid, std::move(h));
    }
  }
  return ctx;
}

Json wigle_document(Workspace& ws, const Bssid& bssid) {
  Json out;
  out["bssid"] = bssid.to_string();
  if (!ws.wigle) {
    out["status"] = "WIGLE_UNAVAILABLE";
    out["details"] = {{"error", "NOT_CONFIGURED"},
                      {"message", "no WIGLE credentials or fixtures configured"}};
    return out;
  }
  std::optional<wigle::WigleDetail> detail;
  try {
    detail = ws.wigle->lookup(bssid);
  } catch (const Error& e) {
    out["status"] = "WIGLE_UNAVAILABLE";
    out["details"] = {{"error", to_string(e.code())}, {"message", e.what()}};
    return out;
  }
  const auto history = ws.history->history(bssid);
  std::optional<double> distance;
  if (!history.records.empty()) {
    const auto finding = wigle::compare(detail, history.records.back());
    out["status"] = to_string(finding.status);
    distance = finding.distance_km;
  } else {
    out["status"] = detail ? "FOUND" : "UNKNOWN_TO_WIGLE";
  }
  out["detail"] = detail ? detail_to_json(*detail) : Json(nullptr);
  out["distance_km"] = distance ? Json(*distance) : Json(nullptr);
  return out;
}

Json flag_to_json(const Flag& flag) {
  Json j;
  j["level"] = to_string(flag.level);
  j["code"] = flag.code;
  j["message"] = flag.message;
  Json evidence = Json::object();
  for (const auto& [k, v] : flag.evidence) evidence[k] = v;
  j["evidence"] = std::move(evidence);
  return j;
}

Json community_to_json(const recommend::CommunitySignal& c) {
  Json j;
  j["weight_total"] = c.weight_total;
  j["failure_rate"] = c.failure_rate ? Json(*c.failure_rate) : Json("UNDETERMINED");
  j["n_reports"] = c.n_reports;
  return j;
}

Json assessment_document(const Workspace& ws, const ingest::ScanBatch& batch,
                         recommend::RiskPosture posture) {
  const Timestamp now = ws.clock();
  const auto ctx = build_context(ws, batch);
  const auto flag_sets = risk::assess(ctx);

  struct Row {
    recommend::Verdict verdict;
    Bssid bssid = Bssid::from_octets({});
    Json doc;
  };
  std::vector<Row> rows;
  for (const auto& obs : batch.observations) {
    const auto& flags = flag_sets.at(obs.bssid).flags;
    auto reports = ws.feedback->for_bssid(obs.bssid);
    // Reports dated after the assessment clock did not exist yet.
    std::erase_if(reports, [&](const auto& r) { return r.observed_at > now; });
    const auto community = recommend::community_signal(reports, now, ws.scoring);
    auto verdict = recommend::recommend(flags, community, posture, ws.scoring);

    Json doc;
    doc["bssid"] = obs.bssid.to_string();
    doc["ssid"] = obs.ssid.display();
    doc["observation"] = observation_to_json(obs);
    doc["security"] = to_string(obs.security.security);
    doc["wps"] = obs.security.wps_advertised;
    doc["vendor"] = vendor_to_json(ws.registry ? ws.registry->lookup(obs.bssid)
                                               : oui::VendorMatch{});
    Json jf = Json::array();
    for (const auto& f : flags) jf.push_back(flag_to_json(f));
    doc["flags"] = std::move(jf);
    doc["community"] = community_to_json(community);
    Json jv;
    jv["decision"] = to_string(verdict.decision);
    jv["score"] = verdict.score;
    jv["reasons"] = verdict.reasons;
    doc["verdict"] = std::move(jv);
    rows.push_back(Row{std::move(verdict), obs.bssid, std::move(doc)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.verdict.decision != b.verdict.decision) {
      return a.verdict.decision > b.verdict.decision;
    }
    if (a.verdict.score != b.verdict.score) return a.verdict.score > b.verdict.score;
    return a.bssid < b.bssid;
  });
  Json out = Json::array();
  for (auto& r : rows) out.push_back(std::move(r.doc));
  return out;
}

}  // namespace wificue::service
