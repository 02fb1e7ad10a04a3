#pragma once

#include <map>
#include <optional>
#include <vector>

#include "wificue/core/error.hpp"
#include "wificue/core/flag.hpp"
#include "wificue/history/history_store.hpp"
#include "wificue/ingest/scan_ingest.hpp"
#include "wificue/oui/registry.hpp"
#include "wificue/probe/probe.hpp"
#include "wificue/wigle/wigle_client.hpp"

namespace wificue::risk {

// Records needed before an SSID's incumbent BSSID counts as established.
inline constexpr std::size_t kMinEstablished = 3;

// Either a finding or the error that prevented the lookup.
struct WigleOutcome {
  std::optional<wigle::WigleFinding> finding;
  std::optional<ErrorCode> error;
  std::string error_message;
};

struct RuleContext {
  ingest::ScanBatch batch;  // normalized
  const oui::OuiRegistry* registry = nullptr;  // null: every lookup misses
  oui::DenyList deny_list;
  // May include records of the batch itself; rules only look at records
  // older than the observation under test.
  std::map<Bssid, history::ApHistory> histories;
  std::map<Bssid, WigleOutcome> wigle;       // no entry: no WIGLE rules
  std::map<Bssid, probe::ProbeResult> probes;  // latest per BSSID
};

struct ApFlagSet {
  Bssid bssid = Bssid::from_octets({});
  std::vector<Flag> flags;  // level desc, code asc, codes unique
};

std::vector<Flag> protocol_flags(const AccessPointObservation& obs);

std::vector<Flag> identity_flags(const AccessPointObservation& obs,
                                 const oui::OuiRegistry* registry,
                                 const oui::DenyList& deny_list);

std::map<Bssid, std::vector<Flag>> twin_flags(
    const ingest::ScanBatch& batch,
    const std::map<Bssid, history::ApHistory>& histories);

std::vector<Flag> deviation_flags(const std::vector<history::Deviation>& deviations);

std::vector<Flag> wigle_flags(const WigleOutcome& outcome);

// Unions every rule's output per AP. A code raised twice keeps its highest
// level.
std::map<Bssid, ApFlagSet> assess(const RuleContext& context);

// Dedup-by-code merge used by assess, exposed for tests.
std::vector<Flag> merge_flags(std::vector<Flag> flags);

// Lower is stronger. OWE sits with the undetermined classes and OPEN below
// it, following the per-class flag levels.
int weakness(SecurityClass security);

}  // namespace wificue::risk
