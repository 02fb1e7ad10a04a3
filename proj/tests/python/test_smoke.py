import json
import os
import shutil

import pytest

import wificue

FIX = os.environ.get("WIFICUE_FIXTURE_DIR", os.path.join(os.path.dirname(__file__), "..", "fixtures"))
NOW = "2024-06-01T12:00:00Z"


def fx(*parts):
    return os.path.join(FIX, *parts)


def read(*parts):
    with open(fx(*parts), encoding="utf-8") as f:
        return f.read()


@pytest.fixture
def golden_db(tmp_path):
    db = tmp_path / "golden.db"
    shutil.copy(fx("golden", "history.jsonl"), db)
    shutil.copy(fx("golden", "feedback.jsonl"), str(db) + ".feedback.jsonl")
    return str(db)


def test_bssid_and_security():
    assert wificue.parse_bssid("00-1A-2B-3C-4D-5E") == "00:1a:2b:3c:4d:5e"
    assert wificue.classify_security("[WPA2-PSK-CCMP][WPS][ESS]") == ("WPA2_PSK", True)
    assert wificue.is_locally_administered("06:a1:b2:c3:d4:e5")
    assert not wificue.is_locally_administered("00:14:22:01:23:45")


def test_errors_carry_code():
    with pytest.raises(wificue.Error) as e:
        wificue.parse_bssid("01:00:5e:00:00:01")
    assert e.value.args[0] == "MULTICAST_ADDRESS"
    assert isinstance(e.value, ValueError)


def test_identifiability():
    assert wificue.identifiability_rate(fx("golden", "manuf"), read("identifiability", "scan.jsonl")) == 0.45


def test_community_signal():
    reports = [
        {"bssid": "00:00:0c:11:22:33", "ssid": "x", "category": "NO_INTERNET",
         "observed_at": "2024-05-18T12:00:00Z", "reporter_id": "a"},
        {"bssid": "00:00:0c:11:22:33", "ssid": "x", "category": "WORKED_OK",
         "observed_at": NOW, "reporter_id": "b"},
    ]
    s = wificue.community_signal(reports, NOW)
    assert s["weight_total"] == pytest.approx(1.5, abs=1e-9)
    assert s["failure_rate"] == pytest.approx(1 / 3, abs=1e-9)


@pytest.mark.parametrize("posture", ["conservative", "balanced", "permissive"])
def test_assess_matches_golden(golden_db, posture):
    raw = wificue.assess_raw(read("golden", "scan.jsonl"), posture=posture, db=golden_db,
                             oui=fx("golden", "manuf"), deny_list=fx("golden", "denylist"), now=NOW)
    assert raw == read("golden", "expected_%s.json" % posture)


def test_service_round_trip(golden_db):
    svc = wificue.Service(golden_db, oui=fx("golden", "manuf"), deny_list=fx("golden", "denylist"),
                          baselines_dir=fx("baselines"), now=NOW, api_token="t")
    auth = {"Authorization": "Bearer t"}
    lines = [json.loads(l) for l in read("golden", "scan.jsonl").splitlines() if l]
    status, body = svc.request("POST", "/v1/scans", lines, headers=auth)
    assert status == 200 and body["accepted"] == 12
    status, doc = svc.request("GET", "/v1/scans/%s/assessment" % body["scan_id"], headers=auth)
    assert status == 200 and doc[0]["verdict"]["decision"] == "AVOID"
    status, err = svc.request("GET", "/v1/baselines/dns")
    assert status == 401 and err["error"]["code"] == "UNAUTHORIZED"
