#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "wificue/history/history_store.hpp"
#include "wificue/oui/registry.hpp"
#include "wificue/recommend/recommender.hpp"
#include "wificue/risk/risk_engine.hpp"
#include "wificue/service/stores.hpp"
#include "wificue/wigle/wigle_client.hpp"

namespace wificue::service {

using Clock = std::function<Timestamp()>;

// Files that live beside the history store at `db`.
struct DbPaths {
  std::filesystem::path history, feedback, probes, scans, wigle_cache, registry, deny_list;
};
DbPaths db_paths(const std::filesystem::path& db);

struct WorkspaceOptions {
  std::filesystem::path db;              // empty: in memory
  std::optional<std::filesystem::path> oui;        // default: <db>.manuf if present
  std::optional<std::filesystem::path> deny_list;  // default: <db>.denylist if present
  std::optional<std::filesystem::path> wigle_fixtures;
  std::optional<std::filesystem::path> scoring_config;
  // LIVE WIGLE credentials; ignored when fixtures are given.
  std::optional<std::string> wigle_api_name;
  std::optional<std::string> wigle_api_token;
  Clock clock = now_utc;
};

// Everything an assessment reads.
struct Workspace {
  DbPaths paths;
  std::unique_ptr<history::HistoryStore> history;
  std::unique_ptr<FeedbackStore> feedback;
  std::unique_ptr<ProbeStore> probes;
  std::unique_ptr<ScanStore> scans;
  std::shared_ptr<const oui::OuiRegistry> registry;  // may be null
  oui::DenyList deny_list;
  std::unique_ptr<wigle::WigleClient> wigle;  // may be null
  recommend::ScoringConfig scoring;
  Clock clock;
};

// Throws Error (kStorageIo, kConfigError, kMalformedLine, ...) when any
// configured input is unusable.
std::unique_ptr<Workspace> open_workspace(const WorkspaceOptions& options);

// Deterministic id: the same normalized observations always get the same id.
std::string scan_id_for(const ingest::ScanBatch& normalized);

risk::RuleContext build_context(const Workspace& ws, const ingest::ScanBatch& batch);

// The assessment document: one entry per AP, most severe verdict first,
// then highest score, then BSSID.
Json assessment_document(const Workspace& ws, const ingest::ScanBatch& batch,
                         recommend::RiskPosture posture);

// GET /v1/wigle/{bssid} body. Performs a live lookup when the client is in
// LIVE mode. Compares against the latest local sighting if there is one,
// otherwise reports FOUND or UNKNOWN_TO_WIGLE. Lookup failures become status
// WIGLE_UNAVAILABLE with the error code in "details".
Json wigle_document(Workspace& ws, const Bssid& bssid);

Json flag_to_json(const Flag& flag);
Json community_to_json(const recommend::CommunitySignal& c);

}  // namespace wificue::service
