#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wificue/core/error.hpp"
#include "wificue/core/rule_table.hpp"
#include "wificue/recommend/recommender.hpp"

using namespace wificue;
using namespace wificue::recommend;


namespace {

const Timestamp kNow = parse_rfc3339("2024-06-01T12:00:00Z");

FeedbackReport report(FeedbackCategory c, double age_days, const char* who = "r") {
  FeedbackReport r;
  r.bssid = parse_bssid("00:00:0c:11:22:33");
  r.ssid = "CityLibrary";
  r.category = c;
  r.observed_at = kNow - std::chrono::seconds(static_cast<long>(std::llround(age_days * 86400)));
  r.reporter_id = who;
  return r;
}

CommunitySignal signal(std::vector<FeedbackReport> v, Timestamp now = kNow) {
  return community_signal(std::span<const FeedbackReport>(v), now);
}

Flag flag_at(const char* code) { return make_flag(code, {{"k", "v"}}); }

int severity(Decision d) { return static_cast<int>(d); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kMalformed;
}

}  // namespace

TEST_CASE("community_signal examples") {
  const auto none = signal({});
  CHECK(none.weight_total == 0.0);
  CHECK_FALSE(none.failure_rate.has_value());
  CHECK(none.n_reports == 0);

  const auto one = signal({report(FeedbackCategory::kNoInternet, 0)});
  CHECK(one.weight_total == 1.0);
  CHECK(one.failure_rate.value() == 1.0);

  const auto two = signal({report(FeedbackCategory::kNoInternet, 14), report(FeedbackCategory::kWorkedOk, 0)});
  CHECK(std::fabs(two.weight_total - 1.5) < 1e-9);
  CHECK(std::fabs(*two.failure_rate - 1.0 / 3.0) < 1e-9);
  CHECK(two.n_reports == 2);
}

TEST_CASE("decay matches 0.5^(age/14) computed by hand") {
  // age 7 d -> 2^-0.5; age 21 d -> 2^-1.5; age 28 d -> 0.25.
  const double w7 = 1.0 / std::sqrt(2.0);
  const double w21 = 1.0 / (2.0 * std::sqrt(2.0));
  const auto s = signal({report(FeedbackCategory::kCertWarning, 7), report(FeedbackCategory::kSlow, 21),
                         report(FeedbackCategory::kPortalHijack, 28)});
  CHECK(std::fabs(s.weight_total - (w7 + w21 + 0.25)) < 1e-12);
  CHECK(std::fabs(*s.failure_rate - (w7 + 0.25) / (w7 + w21 + 0.25)) < 1e-12);
}

TEST_CASE("evidence floor") {
  const auto stale = signal({report(FeedbackCategory::kNoInternet, 28)});
  CHECK(stale.weight_total == doctest::Approx(0.25));
  CHECK_FALSE(stale.failure_rate.has_value());
  CHECK(community_summary(stale) == "community UNDETERMINED weight=0.250 reports=1");
  const auto two = signal({report(FeedbackCategory::kNoInternet, 14), report(FeedbackCategory::kWorkedOk, 0)});
  CHECK(community_summary(two) == "community failure_rate=0.333 weight=1.500 reports=2");
}

TEST_CASE("aging every report one half-life halves the weight") {
  std::mt19937 rng(1);
  for (int round = 0; round < 200; ++round) {
    std::vector<FeedbackReport> v;
    const int n = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i)
      v.push_back(report(static_cast<FeedbackCategory>(rng() % 6), (rng() % 4000) / 100.0));
    const auto now = signal(v);
    const auto later = signal(v, kNow + std::chrono::days(14));
    CHECK(std::fabs(later.weight_total - now.weight_total / 2) < 1e-9);
    if (now.failure_rate && later.failure_rate)
      CHECK(std::fabs(*later.failure_rate - *now.failure_rate) < 1e-9);
    // Report order does not matter.
    std::shuffle(v.begin(), v.end(), rng);
    const auto shuffled = signal(v);
    CHECK(std::fabs(shuffled.weight_total - now.weight_total) < 1e-12);
    CHECK(shuffled.failure_rate.has_value() == now.failure_rate.has_value());
    if (now.failure_rate) CHECK(std::fabs(*shuffled.failure_rate - *now.failure_rate) < 1e-12);
  }
}

TEST_CASE("future report is FUTURE_TIMESTAMP") {
  CHECK(code_of([] { signal({report(FeedbackCategory::kNoInternet, -1)}); }) == ErrorCode::kFutureTimestamp);
}

TEST_CASE("is_negative") {
  CHECK(is_negative(FeedbackCategory::kNoInternet));
  CHECK(is_negative(FeedbackCategory::kAppFailure));
  CHECK(is_negative(FeedbackCategory::kPortalHijack));
  CHECK(is_negative(FeedbackCategory::kCertWarning));
  CHECK_FALSE(is_negative(FeedbackCategory::kSlow));
  CHECK_FALSE(is_negative(FeedbackCategory::kWorkedOk));
}

TEST_CASE("score examples") {
  CHECK(score({}, CommunitySignal{}) == 0.0);
  CommunitySignal third{1.5, 1.0 / 3.0, 2};
  CHECK(std::fabs(score({flag_at("SEC_OPEN")}, third) - (3.0 + 5.0 / 3.0)) < 1e-12);
  CHECK(score({flag_at("SEC_WEP")}, CommunitySignal{}) == 10.0);
  CHECK(score({flag_at("SEC_OWE"), flag_at("SEC_WPS"), flag_at("ID_RANDOM_MAC")}, {}) == 4.0);
}

TEST_CASE("recommend examples") {
  for (auto p : kAllPostures) {
    const auto v = recommend::recommend({}, CommunitySignal{}, p);
    CHECK(v.decision == Decision::kAcceptable);
    CHECK(v.score == 0.0);
  }
  CommunitySignal third{1.5, 1.0 / 3.0, 2};
  CHECK(recommend::recommend({flag_at("SEC_OPEN")}, third, RiskPosture::kBalanced).decision == Decision::kCaution);
  CHECK(recommend::recommend({flag_at("SEC_OPEN")}, third, RiskPosture::kConservative).decision == Decision::kAvoid);
  CHECK(recommend::recommend({flag_at("SEC_OPEN")}, third, RiskPosture::kPermissive).decision == Decision::kAcceptable);
  CHECK(recommend::recommend({flag_at("TWIN_NEW_WEAKER")}, {}, RiskPosture::kPermissive).decision == Decision::kAvoid);
  const auto v = recommend::recommend({flag_at("SEC_WPS"), flag_at("SEC_WPA2_PSK")}, third, RiskPosture::kBalanced);
  CHECK(v.reasons == std::vector<std::string>{"SEC_WPS", "SEC_WPA2_PSK",
                                              "community failure_rate=0.333 weight=1.500 reports=2"});
}

TEST_CASE("threshold boundaries are inclusive") {
  // Exactly 3: BALANCED acceptable, CONSERVATIVE caution.
  const std::vector<Flag> three = {flag_at("SEC_OPEN")};
  CHECK(recommend::recommend(three, {}, RiskPosture::kBalanced).decision == Decision::kAcceptable);
  CHECK(recommend::recommend(three, {}, RiskPosture::kConservative).decision == Decision::kCaution);
  const std::vector<Flag> six = {flag_at("SEC_OPEN"), flag_at("SEC_WPS")};
  CHECK(recommend::recommend(six, {}, RiskPosture::kBalanced).decision == Decision::kCaution);
  CHECK(recommend::recommend(six, {}, RiskPosture::kPermissive).decision == Decision::kAcceptable);
}

TEST_CASE("monotonicity over 1000 random flag-set/community/posture triples") {
  std::vector<std::string> codes;
  for (const auto& r : rule_table()) codes.emplace_back(r.code);
  std::mt19937 rng(20240601);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<Flag> flags;
    const int n = static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) flags.push_back(flag_at(codes[rng() % codes.size()].c_str()));
    CommunitySignal c;
    if (rng() % 2) {
      c.weight_total = 1.0 + (rng() % 1000) / 100.0;
      c.failure_rate = (rng() % 1001) / 1000.0;
      c.n_reports = 1 + rng() % 10;
    }
    const auto posture = kAllPostures[rng() % 3];
    const auto base = recommend::recommend(flags, c, posture);

    auto more = flags;
    more.push_back(flag_at(codes[rng() % codes.size()].c_str()));
    const auto worse = recommend::recommend(more, c, posture);
    if (worse.score < base.score) ++violations;
    if (severity(worse.decision) < severity(base.decision)) ++violations;

    const auto cons = recommend::recommend(flags, c, RiskPosture::kConservative);
    const auto bal = recommend::recommend(flags, c, RiskPosture::kBalanced);
    const auto perm = recommend::recommend(flags, c, RiskPosture::kPermissive);
    if (!(severity(cons.decision) >= severity(bal.decision) &&
          severity(bal.decision) >= severity(perm.decision)))
      ++violations;

    bool critical = false;
    for (const auto& f : flags) critical |= f.level == FlagLevel::kCriticalNegative;
    if (critical && base.decision != Decision::kAvoid) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("feedback_from_json") {
  const Json good = {{"bssid", "00:00:0C:11:22:33"},
                     {"ssid", "CityLibrary"},
                     {"category", "NO_INTERNET"},
                     {"observed_at", "2024-06-01T12:00:00Z"},
                     {"reporter_id", "anon-1"}};
  const auto r = feedback_from_json(good, kNow);
  CHECK(r.bssid.to_string() == "00:00:0c:11:22:33");
  CHECK(r.category == FeedbackCategory::kNoInternet);
  auto j = good;
  j["category"] = "BOGUS";
  CHECK(code_of([&] { feedback_from_json(j, kNow); }) == ErrorCode::kSchemaViolation);
  j = good;
  j["observed_at"] = "2024-06-01T12:00:01Z";
  CHECK(code_of([&] { feedback_from_json(j, kNow); }) == ErrorCode::kFutureTimestamp);
  j = good;
  j["extra"] = true;
  CHECK(code_of([&] { feedback_from_json(j, kNow); }) == ErrorCode::kSchemaViolation);
  j = good;
  j.erase("reporter_id");
  CHECK(code_of([&] { feedback_from_json(j, kNow); }) == ErrorCode::kSchemaViolation);
  j = good;
  j["bssid"] = "nope";
  CHECK(code_of([&] { feedback_from_json(j, kNow); }) == ErrorCode::kSchemaViolation);
  CHECK(feedback_from_json(to_json(r), kNow) == r);
}

TEST_CASE("postures") {
  CHECK(posture_from_string("balanced") == RiskPosture::kBalanced);
  CHECK(posture_from_string("CONSERVATIVE") == RiskPosture::kConservative);
  CHECK(posture_from_string("Permissive") == RiskPosture::kPermissive);
  CHECK_FALSE(posture_from_string("bogus").has_value());
}

TEST_CASE("scoring config") {
  const ScoringConfig defaults;
  CHECK(to_json(scoring_config_from_json(Json::object())) == to_json(defaults));
  CHECK(to_json(scoring_config_from_json(to_json(defaults))) == to_json(defaults));
  const auto shipped = load_scoring_config(std::string(WIFICUE_FIXTURE_DIR) + "/../../config/scoring.json");
  CHECK(to_json(shipped) == to_json(defaults));

  const auto c = scoring_config_from_json(Json{{"half_life_days", 7.0}});
  const auto v = std::vector<FeedbackReport>{report(FeedbackCategory::kNoInternet, 7)};
  CHECK(community_signal(v, kNow, c).weight_total == doctest::Approx(0.5));

  for (const char* bad : {R"({"nope":1})", R"({"half_life_days":-1})", R"({"half_life_days":0})",
                          R"({"postures":{"BALANCED":{"acceptable_max":7,"caution_max":6}}})",
                          R"({"postures":{"CONSERVATIVE":{"acceptable_max":4,"caution_max":7}}})",
                          R"({"level_weights":{"NEGATIVE":20}})"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { scoring_config_from_json(Json::parse(bad)); }) == ErrorCode::kConfigError);
  }
}
