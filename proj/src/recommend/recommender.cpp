#include "wificue/recommend/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wificue/core/error.hpp"

namespace wificue::recommend {
namespace {

constexpr std::array kCategories = {
    FeedbackCategory::kNoInternet, FeedbackCategory::kAppFailure,
    FeedbackCategory::kPortalHijack, FeedbackCategory::kCertWarning,
    FeedbackCategory::kSlow, FeedbackCategory::kWorkedOk};

[[noreturn]] void violation(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kSchemaViolation, "field '" + field + "': " + why, field);
}

[[noreturn]] void config_error(const std::string& why) {
  throw Error(ErrorCode::kConfigError, "scoring config: " + why);
}

std::string str_field(const Json& j, const std::string& field) {
  if (!j.contains(field)) violation(field, "missing");
  if (!j[field].is_string()) violation(field, "expected a string");
  return j[field].get<std::string>();
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double number(const Json& j, const std::string& key) {
  if (!j.is_number()) config_error("'" + key + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v) || v < 0) config_error("'" + key + "' must be finite and >= 0");
  return v;
}

}  // namespace

std::string_view to_string(FeedbackCategory c) {
  switch (c) {
    case FeedbackCategory::kNoInternet: return "NO_INTERNET";
    case FeedbackCategory::kAppFailure: return "APP_FAILURE";
    case FeedbackCategory::kPortalHijack: return "PORTAL_HIJACK";
    case FeedbackCategory::kCertWarning: return "CERT_WARNING";
    case FeedbackCategory::kSlow: return "SLOW";
    case FeedbackCategory::kWorkedOk: return "WORKED_OK";
  }
  return "";
}

std::optional<FeedbackCategory> feedback_category_from_string(std::string_view name) {
  for (auto c : kCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

bool is_negative(FeedbackCategory c) {
  return c != FeedbackCategory::kWorkedOk && c != FeedbackCategory::kSlow;
}

FeedbackReport feedback_from_json(const Json& j, Timestamp now) {
  if (!j.is_object()) violation("feedback", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "bssid" && key != "ssid" && key != "category" && key != "observed_at" &&
        key != "reporter_id") {
      violation(key, "unknown field");
    }
  }
  FeedbackReport r;
  try {
    r.bssid = parse_bssid(str_field(j, "bssid"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaViolation) throw;
    violation("bssid", e.what());
  }
  r.ssid = str_field(j, "ssid");
  if (r.ssid.size() > Ssid::kMaxBytes) violation("ssid", "longer than 32 bytes");
  const auto category = str_field(j, "category");
  const auto parsed = feedback_category_from_string(category);
  if (!parsed) violation("category", "unknown category '" + category + "'");
  r.category = *parsed;
  const auto when = try_parse_rfc3339(str_field(j, "observed_at"));
  if (!when) violation("observed_at", "not an RFC 3339 timestamp");
  r.observed_at = *when;
  if (r.observed_at > now) {
    throw Error(ErrorCode::kFutureTimestamp,
                "observed_at " + format_rfc3339(r.observed_at) + " is in the future",
                "observed_at");
  }
  r.reporter_id = str_field(j, "reporter_id");
  return r;
}

Json to_json(const FeedbackReport& report) {
  Json j;
  j["bssid"] = report.bssid.to_string();
  j["ssid"] = report.ssid;
  j["category"] = to_string(report.category);
  j["observed_at"] = format_rfc3339(report.observed_at);
  j["reporter_id"] = report.reporter_id;
  return j;
}

std::string_view to_string(RiskPosture p) {
  switch (p) {
    case RiskPosture::kConservative: return "CONSERVATIVE";
    case RiskPosture::kBalanced: return "BALANCED";
    case RiskPosture::kPermissive: return "PERMISSIVE";
  }
  return "";
}

std::optional<RiskPosture> posture_from_string(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto p : kAllPostures) {
    if (to_string(p) == upper) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::kAcceptable: return "ACCEPTABLE";
    case Decision::kCaution: return "CAUTION";
    case Decision::kAvoid: return "AVOID";
  }
  return "";
}

ScoringConfig scoring_config_from_json(const Json& j) {
  if (!j.is_object()) config_error("expected a JSON object");
  ScoringConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "half_life_days") {
      c.half_life_days = number(value, key);
      if (c.half_life_days <= 0) config_error("half_life_days must be > 0");
    } else if (key == "evidence_floor") {
      c.evidence_floor = number(value, key);
    } else if (key == "community_weight") {
      c.community_weight = number(value, key);
    } else if (key == "level_weights") {
      if (!value.is_object()) config_error("level_weights must be an object");
      for (const auto& [name, w] : value.items()) {
        const auto level = flag_level_from_string(name);
        if (!level) config_error("unknown flag level '" + name + "'");
        c.level_weight[static_cast<std::size_t>(*level)] = number(w, name);
      }
    } else if (key == "postures") {
      if (!value.is_object()) config_error("postures must be an object");
      for (const auto& [name, t] : value.items()) {
        const auto posture = posture_from_string(name);
        if (!posture || !t.is_object()) config_error("bad posture entry '" + name + "'");
        auto& th = c.thresholds[static_cast<std::size_t>(*posture)];
        for (const auto& [tk, tv] : t.items()) {
          if (tk == "acceptable_max") {
            th.acceptable_max = number(tv, tk);
          } else if (tk == "caution_max") {
            th.caution_max = number(tv, tk);
          } else {
            config_error("unknown threshold '" + tk + "'");
          }
        }
      }
    } else {
      config_error("unknown key '" + key + "'");
    }
  }
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    if (c.thresholds[i].acceptable_max > c.thresholds[i].caution_max) {
      config_error("acceptable_max exceeds caution_max");
    }
    if (i > 0 && (c.thresholds[i].acceptable_max < c.thresholds[i - 1].acceptable_max ||
                  c.thresholds[i].caution_max < c.thresholds[i - 1].caution_max)) {
      config_error("a more permissive posture has tighter thresholds");
    }
  }
  for (std::size_t i = 1; i < c.level_weight.size(); ++i) {
    if (c.level_weight[i] < c.level_weight[i - 1]) {
      config_error("level weights must not decrease with severity");
    }
  }
  return c;
}

ScoringConfig load_scoring_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open scoring config " + path);
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) config_error(path + " is not valid JSON");
  return scoring_config_from_json(j);
}

Json to_json(const ScoringConfig& config) {
  Json j;
  j["half_life_days"] = config.half_life_days;
  j["evidence_floor"] = config.evidence_floor;
  Json weights;
  for (int l = 3; l >= 0; --l) {
    weights[std::string(to_string(static_cast<FlagLevel>(l)))] =
        config.level_weight[static_cast<std::size_t>(l)];
  }
  j["level_weights"] = std::move(weights);
  j["community_weight"] = config.community_weight;
  Json postures;
  for (auto p : kAllPostures) {
    const auto& t = config.for_posture(p);
    postures[std::string(to_string(p))] = {{"acceptable_max", t.acceptable_max},
                                           {"caution_max", t.caution_max}};
  }
  j["postures"] = std::move(postures);
  return j;
}

CommunitySignal community_signal(std::span<const FeedbackReport> reports, Timestamp now,
                                 const ScoringConfig& config) {
  CommunitySignal s;
  s.n_reports = reports.size();
  double negative = 0.0;
  for (const auto& r : reports) {
    if (r.observed_at > now) {
      throw Error(ErrorCode::kFutureTimestamp,
                  "feedback dated " + format_rfc3339(r.observed_at) + " is after " +
                      format_rfc3339(now));
    }
    const double w = std::pow(0.5, days_between(r.observed_at, now) / config.half_life_days);
    s.weight_total += w;
    if (is_negative(r.category)) negative += w;
  }
  if (s.weight_total >= config.evidence_floor && s.weight_total > 0) {
    s.failure_rate = negative / s.weight_total;
  }
  return s;
}

double score(const std::vector<Flag>& flags, const CommunitySignal& community,
             const ScoringConfig& config) {
  double base = 0.0;
  for (const auto& f : flags) base += config.weight(f.level);
  if (community.failure_rate) base += config.community_weight * *community.failure_rate;
  return base;
}

Verdict recommend(const std::vector<Flag>& flags, const CommunitySignal& community,
                  RiskPosture posture, const ScoringConfig& config) {
  Verdict v;
  v.score = score(flags, community, config);
  const bool critical = std::any_of(flags.begin(), flags.end(), [](const Flag& f) {
    return f.level == FlagLevel::kCriticalNegative;
  });
  const auto& t = config.for_posture(posture);
  if (critical || v.score > t.caution_max) {
    v.decision = Decision::kAvoid;
  } else if (v.score > t.acceptable_max) {
    v.decision = Decision::kCaution;
  } else {
    v.decision = Decision::kAcceptable;
  }
  std::vector<Flag> sorted = flags;
  sort_flags(sorted);
  for (const auto& f : sorted) v.reasons.push_back(f.code);
  v.reasons.push_back(community_summary(community));
  return v;
}

std::string community_summary(const CommunitySignal& community) {
  const std::string tail =
      " weight=" + fixed3(community.weight_total) + " reports=" + std::to_string(community.n_reports);
  if (!community.failure_rate) return "community UNDETERMINED" + tail;
  return "community failure_rate=" + fixed3(*community.failure_rate) + tail;
}

}  // namespace wificue::recommend
