#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wificue/core/flag.hpp"
#include "wificue/core/observation.hpp"

namespace wificue::recommend {

enum class FeedbackCategory {
  kNoInternet,
  kAppFailure,
  kPortalHijack,
  kCertWarning,
  kSlow,
  kWorkedOk,
};

std::string_view to_string(FeedbackCategory c);
std::optional<FeedbackCategory> feedback_category_from_string(std::string_view name);
// SLOW and WORKED_OK are the only non-negative outcomes.
bool is_negative(FeedbackCategory c);

struct FeedbackReport {
  Bssid bssid = Bssid::from_octets({});
  std::string ssid;
  FeedbackCategory category = FeedbackCategory::kWorkedOk;
  Timestamp observed_at{};
  std::string reporter_id;

  bool operator==(const FeedbackReport&) const = default;
};

// {"bssid", "ssid", "category", "observed_at", "reporter_id"}, all required,
// nothing else allowed. Throws Error(kSchemaViolation), or
// Error(kFutureTimestamp) when observed_at is after `now`.
FeedbackReport feedback_from_json(const Json& j, Timestamp now);
Json to_json(const FeedbackReport& report);

struct CommunitySignal {
  double weight_total = 0.0;
  std::optional<double> failure_rate;  // nullopt = UNDETERMINED
  std::size_t n_reports = 0;
};

enum class RiskPosture { kConservative, kBalanced, kPermissive };
inline constexpr std::array<RiskPosture, 3> kAllPostures = {
    RiskPosture::kConservative, RiskPosture::kBalanced, RiskPosture::kPermissive};
std::string_view to_string(RiskPosture p);
// Case-insensitive.
std::optional<RiskPosture> posture_from_string(std::string_view name);

// Enumerator values increase with severity.
enum class Decision { kAcceptable = 0, kCaution = 1, kAvoid = 2 };
std::string_view to_string(Decision d);

struct Verdict {
  Decision decision = Decision::kAcceptable;
  double score = 0.0;
  std::vector<std::string> reasons;  // flag codes, then community summary
};

struct Thresholds {
  double acceptable_max = 0.0;
  double caution_max = 0.0;
};

// Every tunable number of the recommender in one table.
struct ScoringConfig {
  double half_life_days = 14.0;
  double evidence_floor = 1.0;
  // Indexed by FlagLevel.
  std::array<double, 4> level_weight = {0.0, 1.0, 3.0, 10.0};
  double community_weight = 5.0;
  // Indexed by RiskPosture.
  std::array<Thresholds, 3> thresholds = {
      Thresholds{1.0, 3.0}, Thresholds{3.0, 6.0}, Thresholds{6.0, 10.0}};

  double weight(FlagLevel level) const {
    return level_weight[static_cast<std::size_t>(level)];
  }
  const Thresholds& for_posture(RiskPosture p) const {
    return thresholds[static_cast<std::size_t>(p)];
  }
};

// Missing keys keep their defaults. Throws Error(kConfigError) for unknown
// keys, negative weights, or thresholds that are unordered within a posture
// or looser for a more cautious posture.
ScoringConfig scoring_config_from_json(const Json& j);
ScoringConfig load_scoring_config(const std::string& path);
Json to_json(const ScoringConfig& config);

// Report weight 0.5^(age_days / half_life). UNDETERMINED when the total
// weight is under the evidence floor. Throws Error(kFutureTimestamp) for a
// report dated after `now`.
CommunitySignal community_signal(std::span<const FeedbackReport> reports, Timestamp now,
                                 const ScoringConfig& config = {});

double score(const std::vector<Flag>& flags, const CommunitySignal& community,
             const ScoringConfig& config = {});

// Any CRITICAL_NEGATIVE flag means AVOID. Otherwise the score is held
// against the posture's thresholds.
Verdict recommend(const std::vector<Flag>& flags, const CommunitySignal& community,
                  RiskPosture posture, const ScoringConfig& config = {});

// e.g. "community failure_rate=0.333 weight=1.500 reports=2" or
// "community UNDETERMINED weight=0.250 reports=1".
std::string community_summary(const CommunitySignal& community);

}  // namespace wificue::recommend
