"""Wi-Fi access point risk assessment.

JSON-shaped results come back as Python objects; the raw strings are
byte-identical to the HTTP API bodies.
"""

import json as _json

from . import _core
from ._core import Error, classify_security, identifiability_rate, is_locally_administered, parse_bssid

__all__ = [
    "Error",
    "Service",
    "assess",
    "assess_raw",
    "classify_security",
    "community_signal",
    "identifiability_rate",
    "is_locally_administered",
    "parse_bssid",
]


def assess_raw(scan_text, posture="balanced", db="", oui=None, deny_list=None, wigle_fixtures=None, now=None):
    return _core.assess(scan_text, posture, db, oui, deny_list, wigle_fixtures, now)


def assess(scan_text, **kwargs):
    return _json.loads(assess_raw(scan_text, **kwargs))


def community_signal(reports, now):
    return _json.loads(_core.community_signal(_json.dumps(reports), now))


class Service:
    """In-process API: same routes, status codes and bodies as the HTTP server."""

    def __init__(self, db, **kwargs):
        self._svc = _core.Service(db, **kwargs)

    def request(self, method, path, body="", query=None, headers=None):
        if not isinstance(body, str):
            body = _json.dumps(body)
        status, text = self._svc.handle(method, path, body, query or {}, headers or {})
        return status, _json.loads(text)
