#include <doctest.h>

#include <httplib.h>

#include <future>
#include <thread>

#include "service_harness.hpp"
#include "wificue/core/error.hpp"
#include "wificue/service/stores.hpp"

using namespace wificue;
using namespace wificue::service;
using testing::is_envelope;
using testing::req;
using testing::TempDir;

namespace {

Json parse(const Response& r) { return Json::parse(r.body); }

std::string post_golden_scan(Service& svc) {
  const auto r = svc.handle(req("POST", "/v1/scans", testing::lines_as_array(testing::fixture("golden/scan.jsonl"))));
  REQUIRE(r.status == 200);
  return parse(r)["scan_id"].get<std::string>();
}

std::string clean_probe_body(const char* bssid) {
  return Json{{"bssid", bssid},
              {"started_at", "2024-06-01T11:58:00Z"},
              {"dns",
               {{{"domain", "example.com"}, {"resolved", {"93.184.216.34"}}, {"verdict", "MATCH"}},
                {{"domain", "one.one.one.one"}, {"resolved", {"1.1.1.1"}}, {"verdict", "MATCH"}}}},
              {"tls",
               {{{"host", "example.com"}, {"port", 443}, {"verdict", "PIN_OK"}},
                {{"host", "pinned.example.org"}, {"port", 443}, {"verdict", "PIN_OK"}}}},
              {"portal", {{"verdict", "NO_PORTAL"}}}}
      .dump();
}

}  // namespace

TEST_CASE("POST /v1/scans: counts, idempotency, byte-identical store") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  const auto body = testing::lines_as_array(testing::fixture("golden/scan.jsonl"));
  const auto first = svc.handle(req("POST", "/v1/scans", body));
  CHECK(first.status == 200);
  const auto j = parse(first);
  CHECK(j["accepted"] == 12);
  CHECK(j["skipped"] == 0);
  const auto db = dir / "golden.db";
  const auto after_once = testing::slurp(db);
  const auto scans_once = testing::slurp(db.string() + ".scans.jsonl");

  const auto second = svc.handle(req("POST", "/v1/scans", body));
  CHECK(parse(second)["accepted"] == 0);
  CHECK(parse(second)["skipped"] == 12);
  CHECK(parse(second)["scan_id"] == j["scan_id"]);
  CHECK(testing::slurp(db) == after_once);
  CHECK(testing::slurp(db.string() + ".scans.jsonl") == scans_once);
}

TEST_CASE("POST /v1/scans: validation") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  auto r = svc.handle(req("POST", "/v1/scans", "[]"));
  CHECK(r.status == 400);
  CHECK(is_envelope(r.body, "SCHEMA_VIOLATION"));
  CHECK(parse(r)["error"]["message"] == "empty batch");

  r = svc.handle(req("POST", "/v1/scans", R"([{"bssid":"00:00:0c:00:00:01"}])"));
  CHECK(r.status == 400);
  CHECK(is_envelope(r.body, "SCHEMA_VIOLATION"));
  CHECK(parse(r)["error"]["details"]["line"] == 1);

  auto obs = Json::parse(testing::slurp(testing::fixture("clean_single.jsonl")));
  obs["rssi_dbm"] = 10;
  r = svc.handle(req("POST", "/v1/scans", Json::array({obs}).dump()));
  CHECK(is_envelope(r.body, "SCHEMA_VIOLATION"));
  CHECK(parse(r)["error"]["details"]["field"] == "rssi_dbm");

  r = svc.handle(req("POST", "/v1/scans", "{"));
  CHECK(r.status == 400);
  CHECK(is_envelope(r.body));

  r = svc.handle(req("POST", "/v1/scans", std::string(kMaxBodyBytes + 1, ' ')));
  CHECK(r.status == 413);
  CHECK(is_envelope(r.body, "TOO_LARGE"));
}

TEST_CASE("assessment: posture, unknown scan, read-only") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  const auto id = post_golden_scan(svc);
  const auto path = "/v1/scans/" + id + "/assessment";
  const auto a = svc.handle(req("GET", path));
  CHECK(a.status == 200);
  const auto doc = parse(a);
  REQUIRE(doc.is_array());
  CHECK(doc.size() == 12);
  CHECK(doc[0]["verdict"]["decision"] == "AVOID");
  CHECK(doc[0]["observation"].contains("rssi_dbm"));
  CHECK(svc.handle(req("GET", path, "", {{"posture", "balanced"}})).body == a.body);
  CHECK(svc.handle(req("GET", path)).body == a.body);

  const auto bogus = svc.handle(req("GET", path, "", {{"posture", "bogus"}}));
  CHECK(bogus.status == 400);
  CHECK(is_envelope(bogus.body));
  const auto missing = svc.handle(req("GET", "/v1/scans/scan-0000/assessment"));
  CHECK(missing.status == 404);
  CHECK(is_envelope(missing.body, "NOT_FOUND"));
}

TEST_CASE("feedback is visible to the next assessment") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  const auto id = post_golden_scan(svc);
  auto community = [&] {
    for (const auto& e : parse(svc.handle(req("GET", "/v1/scans/" + id + "/assessment"))))
      if (e["bssid"] == "00:1a:2b:00:00:04") return e["community"];
    return Json();
  };
  CHECK(community()["failure_rate"] == "UNDETERMINED");
  const Json fb = {{"bssid", "00:1a:2b:00:00:04"},
                   {"ssid", "HomeNet"},
                   {"category", "NO_INTERNET"},
                   {"observed_at", "2024-06-01T11:59:00Z"},
                   {"reporter_id", "anon"}};
  const auto r = svc.handle(req("POST", "/v1/feedback", fb.dump()));
  CHECK(r.status == 200);
  CHECK(r.body == R"({"accepted":true})");
  CHECK(community()["n_reports"] == 2);
  CHECK(community()["failure_rate"] == 1.0);

  auto bad = fb;
  bad["category"] = "BOGUS";
  auto e = svc.handle(req("POST", "/v1/feedback", bad.dump()));
  CHECK(e.status == 400);
  CHECK(is_envelope(e.body, "SCHEMA_VIOLATION"));
  bad = fb;
  bad["observed_at"] = "2024-06-02T00:00:00Z";
  e = svc.handle(req("POST", "/v1/feedback", bad.dump()));
  CHECK(e.status == 400);
  CHECK(is_envelope(e.body, "FUTURE_TIMESTAMP"));
}

TEST_CASE("history pages") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  auto r = svc.handle(req("GET", "/v1/aps/00:00:00:00:00:99/history"));
  CHECK(r.status == 200);
  CHECK(parse(r)["total"] == 0);
  CHECK(parse(r)["records"].empty());

  r = svc.handle(req("GET", "/v1/aps/00:1a:2b:00:00:11/history", "", {{"limit", "3"}}));
  const auto j = parse(r);
  CHECK(j["total"] == 4);
  REQUIRE(j["records"].size() == 3);
  CHECK(j["records"][0]["observed_at"] == "2024-05-28T18:30:00Z");
  CHECK(j["limit"] == 3);
  CHECK(j["offset"] == 0);

  for (const char* bad : {"-1", "abc", "1001"}) {
    r = svc.handle(req("GET", "/v1/aps/00:1a:2b:00:00:11/history", "", {{"limit", bad}}));
    CHECK(r.status == 400);
    CHECK(is_envelope(r.body));
  }
  r = svc.handle(req("GET", "/v1/aps/not-a-mac/history"));
  CHECK(r.status == 400);
  CHECK(is_envelope(r.body));
}

TEST_CASE("baselines are served verbatim") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  CHECK(svc.handle(req("GET", "/v1/baselines/dns")).body == testing::slurp(testing::fixture("baselines/dns.json")));
  CHECK(svc.handle(req("GET", "/v1/baselines/tls")).body == testing::slurp(testing::fixture("baselines/tls.json")));

  TempDir dir2;
  auto opts = testing::golden_options(dir2);
  opts.baselines_dir.reset();
  Service bare(opts);
  const auto r = bare.handle(req("GET", "/v1/baselines/dns"));
  CHECK(r.status == 404);
  CHECK(is_envelope(r.body, "NOT_FOUND"));
}

TEST_CASE("malformed baseline file refuses to start") {
  TempDir dir;
  TempDir base;
  testing::spit(base / "dns.json", R"({"entries":[],"fetched_at":"2024-06-01T08:00:00Z","source":"x"})");
  auto opts = testing::golden_options(dir);
  opts.baselines_dir = base.path();
  try {
    Service svc(opts);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
  }
}

TEST_CASE("probes: flags returned and carried into assessments") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  const auto id = post_golden_scan(svc);
  auto r = svc.handle(req("POST", "/v1/probes", clean_probe_body("00:1a:2b:00:00:04")));
  CHECK(r.status == 200);
  CHECK(r.body == R"({"flags":[]})");

  auto tampered = Json::parse(clean_probe_body("00:1a:2b:00:00:04"));
  tampered["dns"][0]["resolved"] = {"10.0.0.1"};
  tampered["dns"][0]["verdict"] = "MISMATCH";
  r = svc.handle(req("POST", "/v1/probes", tampered.dump()));
  CHECK(r.status == 200);
  CHECK(parse(r)["flags"][0]["code"] == "PROBE_DNS_TAMPER");

  const auto doc = parse(svc.handle(req("GET", "/v1/scans/" + id + "/assessment")));
  bool seen = false;
  for (const auto& e : doc)
    if (e["bssid"] == "00:1a:2b:00:00:04") {
      seen = true;
      CHECK(e["verdict"]["decision"] == "AVOID");
      CHECK(e["flags"][0]["code"] == "PROBE_DNS_TAMPER");
    }
  CHECK(seen);

  auto missing = Json::parse(clean_probe_body("00:1a:2b:00:00:04"));
  missing["tls"].erase(1);
  r = svc.handle(req("POST", "/v1/probes", missing.dump()));
  CHECK(r.status == 400);
  CHECK(is_envelope(r.body, "SCHEMA_VIOLATION"));
}

TEST_CASE("wigle proxy") {
  TempDir dir;
  Service svc(testing::golden_options(dir, true));
  auto r = svc.handle(req("GET", "/v1/wigle/00:1a:2b:00:00:04"));
  CHECK(r.status == 200);
  auto j = parse(r);
  CHECK(j["status"] == "FOUND");
  CHECK(j["detail"]["ssid"] == "HomeNet");
  CHECK(j["detail"]["encryption"] == "wpa2");

  j = parse(svc.handle(req("GET", "/v1/wigle/00:14:22:aa:bb:03")));
  CHECK(j["status"] == "UNKNOWN_TO_WIGLE");
  CHECK(j["detail"].is_null());

  j = parse(svc.handle(req("GET", "/v1/wigle/00:25:9c:00:00:08")));
  CHECK(j["status"] == "WIGLE_UNAVAILABLE");
  CHECK(j["details"]["error"] == "MALFORMED_RESPONSE");

  TempDir dir2;
  Service unconfigured(testing::golden_options(dir2, false));
  j = parse(unconfigured.handle(req("GET", "/v1/wigle/00:1a:2b:00:00:04")));
  CHECK(j["status"] == "WIGLE_UNAVAILABLE");
  CHECK(j["details"]["error"] == "NOT_CONFIGURED");
}

TEST_CASE("wigle proxy: quota error maps to WIGLE_UNAVAILABLE") {
  TempDir dir;
  auto opts = testing::golden_options(dir);
  Service svc(opts);
  auto t = std::make_shared<testing::CountingTransport>();
  t->respond = [](const Bssid&) { return wigle::HttpResult{429, ""}; };
  wigle::WigleClientConfig cfg;
  cfg.mode = wigle::WigleMode::kLive;
  svc.workspace().wigle = std::make_unique<wigle::WigleClient>(cfg, t);
  const auto j = parse(svc.handle(req("GET", "/v1/wigle/00:1a:2b:00:00:04")));
  CHECK(j["status"] == "WIGLE_UNAVAILABLE");
  CHECK(j["details"]["error"] == "QUOTA_EXCEEDED");
  CHECK(t->calls == 1);
}

TEST_CASE("contract sweep: every endpoint x {valid, malformed, unauthorized}") {
  TempDir dir;
  Service svc(testing::golden_options(dir, true, std::string("s3cret")));
  const std::map<std::string, std::string> auth = {{"authorization", "Bearer s3cret"}};
  const auto scan_body = testing::lines_as_array(testing::fixture("golden/scan.jsonl"));
  const auto scan = svc.handle(req("POST", "/v1/scans", scan_body, {}, auth));
  REQUIRE(scan.status == 200);
  const auto id = parse(scan)["scan_id"].get<std::string>();
  const std::string fb = R"({"bssid":"00:1a:2b:00:00:04","ssid":"HomeNet","category":"WORKED_OK","observed_at":"2024-06-01T11:00:00Z","reporter_id":"x"})";

  struct Case {
    std::string method, path, valid_body, bad_body;
    std::map<std::string, std::string> bad_query;
    int bad_status;
  };
  const std::vector<Case> cases = {
      {"POST", "/v1/scans", scan_body, "[{}]", {}, 400},
      {"GET", "/v1/scans/" + id + "/assessment", "", "", {{"posture", "nope"}}, 400},
      {"GET", "/v1/aps/00:1a:2b:00:00:11/history", "", "", {{"limit", "-1"}}, 400},
      {"POST", "/v1/feedback", fb, R"({"bssid":"x"})", {}, 400},
      {"GET", "/v1/baselines/dns", "", "", {}, 0},
      {"GET", "/v1/baselines/tls", "", "", {}, 0},
      {"POST", "/v1/probes", clean_probe_body("00:1a:2b:00:00:04"), R"({"bssid":1})", {}, 400},
      {"GET", "/v1/wigle/00:1a:2b:00:00:04", "", "", {}, 0},
  };
  for (const auto& c : cases) {
    CAPTURE(c.path);
    const auto ok = svc.handle(req(c.method, c.path, c.valid_body, {}, auth));
    CHECK(ok.status == 200);
    CHECK_FALSE(Json::parse(ok.body, nullptr, false).is_discarded());

    if (c.bad_status) {
      const auto bad = svc.handle(req(c.method, c.path, c.bad_body, c.bad_query, auth));
      CHECK(bad.status == c.bad_status);
      CHECK(is_envelope(bad.body));
    }

    for (const auto& h : std::vector<std::map<std::string, std::string>>{
             {}, {{"authorization", "Bearer wrong"}}, {{"authorization", "s3cret"}}}) {
      const auto denied = svc.handle(req(c.method, c.path, c.valid_body, {}, h));
      CHECK(denied.status == 401);
      CHECK(is_envelope(denied.body, "UNAUTHORIZED"));
    }

    const auto wrong = svc.handle(req(c.method == "GET" ? "DELETE" : "GET", c.path, "", {}, auth));
    CHECK(wrong.status == 405);
    CHECK(is_envelope(wrong.body, "METHOD_NOT_ALLOWED"));
  }
  const auto nf = svc.handle(req("GET", "/v2/nothing", "", {}, auth));
  CHECK(nf.status == 404);
  CHECK(is_envelope(nf.body, "NOT_FOUND"));
}

TEST_CASE("stores persist across reopen") {
  TempDir dir;
  auto opts = testing::golden_options(dir);
  std::string id;
  {
    Service svc(opts);
    id = post_golden_scan(svc);
    svc.handle(req("POST", "/v1/probes", clean_probe_body("00:1a:2b:00:00:04")));
  }
  Service again(opts);
  CHECK(again.handle(req("GET", "/v1/scans/" + id + "/assessment")).status == 200);
  CHECK(again.workspace().probes->latest().size() == 1);
  CHECK(again.workspace().feedback->size() == 3);
}

TEST_CASE("over HTTP: envelopes survive the adapter") {
  TempDir dir;
  Service svc(testing::golden_options(dir));
  std::promise<int> bound;
  auto fut = bound.get_future();
  std::thread server([&] { svc.listen("127.0.0.1", 0, [&](int port) { bound.set_value(port); }); });
  const int port = fut.get();
  httplib::Client client("127.0.0.1", port);
  auto r = client.Get("/v1/nothing");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(is_envelope(r->body, "NOT_FOUND"));
  r = client.Post("/v1/scans", testing::lines_as_array(testing::fixture("golden/scan.jsonl")), "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type").find("application/json") == 0);
  const auto id = Json::parse(r->body)["scan_id"].get<std::string>();
  r = client.Get(("/v1/scans/" + id + "/assessment?posture=conservative").c_str());
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == svc.handle(req("GET", "/v1/scans/" + id + "/assessment", "", {{"posture", "conservative"}})).body);
  svc.stop();
  server.join();
}
