#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wificue/core/observation.hpp"

namespace wificue::ingest {

enum class ParseMode { kStrict, kLenient };

struct LineError {
  std::size_t line = 0;
  std::string field;
  std::string message;
};

struct ParseResult {
  std::vector<AccessPointObservation> observations;  // input order
  std::size_t skipped = 0;
  std::vector<LineError> errors;  // one per skipped line
};

struct ScanBatch {
  std::string scan_id;
  std::vector<AccessPointObservation> observations;
  Timestamp ingested_at{};
};

// Canonical line-delimited format. Blank lines are ignored. In strict mode
// the first bad line throws Error(kSchemaViolation) carrying its line
// number; in lenient mode it is skipped and recorded.
ParseResult parse_canonical(std::istream& in, ParseMode mode,
                            std::optional<Timestamp> ingest_time = std::nullopt);

struct AirodumpOptions {
  std::string scanner_id = "airodump-ng";
  ParseMode mode = ParseMode::kStrict;
};

// airodump-ng CSV export. Only the access-point section is read; the
// station section that follows it is ignored. Timestamps carry no zone and
// are taken as UTC. Throws Error(kMalformedHeader) when no AP header
// ("BSSID, First time seen, ...") is present.
ParseResult parse_airodump_csv(std::istream& in, const AirodumpOptions& options);

// Builds a capability string from airodump's Privacy/Cipher/Authentication
// columns: one "[<privacy>-<auth>-<cipher>]" token per privacy value, with
// OPN -> "[ESS]", WEP -> "[WEP]", MGT auth spelled EAP, multiple auth or
// cipher values joined with '+', empty parts omitted.
std::string airodump_capabilities(std::string_view privacy,
                                  std::string_view cipher,
                                  std::string_view auth);

// Center frequency for a 2.4 GHz or 5 GHz channel number, 0 otherwise.
int frequency_for_channel(int channel);

// Keeps one observation per BSSID: strongest rssi, then latest observed_at,
// then earliest in input. Output is sorted by canonical BSSID.
ScanBatch normalize(ScanBatch batch);

}  // namespace wificue::ingest
