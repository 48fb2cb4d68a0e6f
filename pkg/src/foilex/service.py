"""Minimal JSON-over-HTTP surface for the engine.

    POST /explanations        ExplanationRequest body -> ExplanationOutcome
    GET  /rules               rule set
    GET  /history?device=...  events (optionally only those touching a device)
"""

from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .engine import VALIDATION_FAILURES, Engine
from .model import ErrorOccurred, ExplanationDelivered, ExplanationRequest, ModelError, RuleFired, format_ts

log = logging.getLogger(__name__)


def _touches(event, device: str, rules) -> bool:
    kind = event.kind
    if isinstance(kind, (ErrorOccurred, ExplanationDelivered)):
        return kind.device == device
    assert isinstance(kind, RuleFired)
    rule = rules.get(kind.rule_id)
    return rule is not None and rule.targets(device)


def make_handler(engine: Engine) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        server_version = "foilex"

        def log_message(self, fmt, *args):
            log.debug("%s " + fmt, self.address_string(), *args)

        def _send(self, status: int, payload) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            url = urlparse(self.path)
            if url.path == "/rules":
                self._send(200, engine.scenario.rules_json())
            elif url.path == "/history":
                device = parse_qs(url.query).get("device", [None])[0]
                events = engine.log.snapshot()
                if device is not None:
                    events = tuple(e for e in events if _touches(e, device, engine.scenario.rules))
                self._send(200, [e.to_json() for e in events])
            else:
                self._send(404, {"error": f"no route {url.path}"})

        def do_POST(self):
            if urlparse(self.path).path != "/explanations":
                self._send(404, {"error": f"no route {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length") or 0)
                body = json.loads(self.rfile.read(length) or b"{}")
                if isinstance(body, dict) and "at" not in body:
                    body["at"] = format_ts(datetime.now(timezone.utc))
                req = ExplanationRequest.from_json(body)
            except (ValueError, ModelError) as exc:
                self._send(400, {"error": str(exc)})
                return
            outcome = engine.explain(req)
            status = 200
            if outcome.failure is not None:
                status = 400 if outcome.failure.reason in VALIDATION_FAILURES else 422
            self._send(status, outcome.to_json())

    return Handler


def make_server(engine: Engine, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(engine))
