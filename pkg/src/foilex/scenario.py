"""Scenario files: users, devices, rules, history and embedded requests.

A scenario is a JSON document::

    {
      "users":   [{"id": "alice", "name": "Alice"}],
      "devices": [{"id": "status_light", "name": "the status light"}],
      "entities": {"door": "the door sensor"},           # optional
      "phrases":  {"door": {"== closed": "the door is closed"}},  # optional
      "errors":   {"bad_wiring": "a wiring fault"},       # optional
      "rules":   [{"id": ..., "name": ..., "owner": ..., "enabled": true,
                   "precondition": {"and": [{"entity": ..., "op": ..., "value": ...}, ...]},
                   "actions": [{"device": ..., "state": ..., "description": ...}]}],
      "history": [{"ts": "2024-01-01T12:00:00.000Z", "kind": "rule_fired", "rule_id": ...}],
      "request": {"user": ..., "device": ..., "at": ...}   # or a list of requests
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .explainer import Vocabulary
from .history import EventLog
from .model import (
    Action,
    AtomicCondition,
    ErrorOccurred,
    ExplanationDelivered,
    ExplanationRequest,
    ModelError,
    Rule,
    RuleFired,
    SystemEvent,
    condition_from_json,
)

_NAME = {"type": "string", "minLength": 1}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["users", "devices", "rules"],
    "properties": {
        "users": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {"id": _NAME, "name": {"type": "string"}},
            },
        },
        "devices": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {"id": _NAME, "name": {"type": "string"}},
            },
        },
        "entities": {"type": "object", "additionalProperties": {"type": "string"}},
        "phrases": {
            "type": "object",
            "additionalProperties": {"type": "object", "additionalProperties": {"type": "string"}},
        },
        "errors": {"type": "object", "additionalProperties": {"type": "string"}},
        "rules": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "owner", "precondition", "actions"],
                "properties": {
                    "id": _NAME,
                    "name": {"type": "string"},
                    "owner": _NAME,
                    "enabled": {"type": "boolean"},
                    "precondition": {"$ref": "#/$defs/condition"},
                    "actions": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["device", "state"],
                            "properties": {
                                "device": _NAME,
                                "state": _NAME,
                                "description": {"type": "string"},
                            },
                        },
                    },
                },
            },
        },
        "history": {"type": "array", "items": {"$ref": "#/$defs/event"}},
        "request": {
            "oneOf": [
                {"$ref": "#/$defs/request"},
                {"type": "array", "items": {"$ref": "#/$defs/request"}},
            ]
        },
    },
    "$defs": {
        "condition": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["and"],
                    "properties": {"and": {"type": "array", "minItems": 2, "items": {"$ref": "#/$defs/condition"}}},
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["or"],
                    "properties": {"or": {"type": "array", "minItems": 2, "items": {"$ref": "#/$defs/condition"}}},
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["not"],
                    "properties": {"not": {"$ref": "#/$defs/condition"}},
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["entity", "op", "value"],
                    "properties": {
                        "entity": _NAME,
                        "op": {"type": "string"},
                        "value": {"type": ["string", "number", "boolean"]},
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "event": {
            "type": "object",
            "required": ["ts", "kind"],
            "properties": {
                "ts": {"type": "string"},
                "kind": {"enum": ["rule_fired", "error", "explanation_delivered"]},
                "rule_id": _NAME,
                "error_code": _NAME,
                "device": _NAME,
                "user": _NAME,
            },
        },
        "request": {
            "type": "object",
            "required": ["user", "device", "at"],
            "properties": {"user": _NAME, "device": _NAME, "at": {"type": "string"}, "fact_rule": _NAME},
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


class ScenarioParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScenarioInvalid(ValueError):
    def __init__(self, violations: list[str]) -> None:
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass
class Scenario:
    users: dict[str, str]
    devices: dict[str, str]
    rules: dict[str, Rule]
    vocab: Vocabulary
    log: EventLog
    requests: list[ExplanationRequest]
    raw: dict

    def rules_json(self) -> list[dict]:
        return [r.to_json() for r in self.rules.values()]


def parse_text(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from None
    except RecursionError:
        raise ScenarioParseError("document nested too deeply", 1, 1) from None


def read_file(path: str | Path) -> Any:
    return parse_text(Path(path).read_text(encoding="utf-8"))


def _where(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def validate_document(doc: Any) -> list[str]:
    """Every problem with an already-parsed scenario document (empty when fine)."""
    try:
        schema_errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    except RecursionError:
        return ["<root>: document nested too deeply"]
    if schema_errors:
        return [f"{_where(e.absolute_path)}: {e.message}" for e in schema_errors]
    _, violations = _build(doc)
    return violations


def validate_scenario(path: str | Path) -> list[str]:
    return validate_document(read_file(path))


def load_document(doc: Any) -> Scenario:
    violations = validate_document(doc)
    if violations:
        raise ScenarioInvalid(violations)
    scenario, _ = _build(doc)
    assert scenario is not None
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    return load_document(read_file(path))


def _build(doc: dict) -> tuple[Scenario | None, list[str]]:
    violations: list[str] = []
    users = {u["id"]: u.get("name", u["id"]) for u in doc["users"]}
    devices = {d["id"]: d.get("name") or d["id"].replace("_", " ") for d in doc["devices"]}
    if len(users) != len(doc["users"]):
        violations.append("users: duplicate user id")
    if len(devices) != len(doc["devices"]):
        violations.append("devices: duplicate device id")

    rules: dict[str, Rule] = {}
    for i, r in enumerate(doc["rules"]):
        where = f"rules/{i} ({r['id']})"
        if r["id"] in rules:
            violations.append(f"{where}: duplicate rule id")
            continue
        if r["owner"] not in users:
            violations.append(f"{where}: owner {r['owner']!r} is not a known user")
        for a in r["actions"]:
            if a["device"] not in devices:
                violations.append(f"{where}: action targets unknown device {a['device']!r}")
        try:
            rules[r["id"]] = Rule(
                id=r["id"],
                name=r.get("name") or r["id"],
                owner=r["owner"],
                precondition=condition_from_json(r["precondition"]),
                actions=tuple(Action(a["device"], a["state"], a.get("description")) for a in r["actions"]),
                enabled=r.get("enabled", True),
            )
        except (ModelError, RecursionError) as exc:
            violations.append(f"{where}: {exc}")

    events: list[SystemEvent] = []
    for i, raw in enumerate(doc.get("history", [])):
        where = f"history/{i}"
        try:
            event = SystemEvent.from_json(raw)
        except ModelError as exc:
            violations.append(f"{where}: {exc}")
            continue
        kind = event.kind
        if isinstance(kind, (RuleFired, ExplanationDelivered)) and kind.rule_id not in rules:
            violations.append(f"{where}: unknown rule id {kind.rule_id!r}")
        if isinstance(kind, (ErrorOccurred, ExplanationDelivered)) and kind.device not in devices:
            violations.append(f"{where}: unknown device {kind.device!r}")
        if isinstance(kind, ExplanationDelivered) and kind.user not in users:
            violations.append(f"{where}: unknown user {kind.user!r}")
        if events and event.timestamp < events[-1].timestamp:
            violations.append(f"{where}: timestamp goes backwards")
            continue
        events.append(event)

    raw_requests = doc.get("request", [])
    if isinstance(raw_requests, dict):
        raw_requests = [raw_requests]
    requests: list[ExplanationRequest] = []
    for i, raw in enumerate(raw_requests):
        where = f"request/{i}"
        try:
            req = ExplanationRequest.from_json(raw)
        except ModelError as exc:
            violations.append(f"{where}: {exc}")
            continue
        if req.user not in users:
            violations.append(f"{where}: unknown user {req.user!r}")
        if req.device not in devices:
            violations.append(f"{where}: unknown device {req.device!r}")
        if req.fact_rule is not None and req.fact_rule not in rules:
            violations.append(f"{where}: unknown fact rule {req.fact_rule!r}")
        requests.append(req)

    phrases = _canonical_phrases(doc.get("phrases", {}), violations)
    if violations:
        return None, violations
    vocab = Vocabulary(
        device_names=devices,
        entity_names={k.casefold(): v for k, v in doc.get("entities", {}).items()},
        phrases=phrases,
        errors=dict(doc.get("errors", {})),
    )
    return Scenario(users, devices, rules, vocab, EventLog(events), requests, doc), []


def _canonical_phrases(raw: dict[str, dict[str, str]], violations: list[str]) -> dict[str, dict[str, str]]:
    """Re-key phrases through atom canonicalization so "Temp": {"> 25.0": ...} still matches."""
    out: dict[str, dict[str, str]] = {}
    for entity, table in raw.items():
        for key, phrase in table.items():
            op, _, value = key.strip().partition(" ")
            try:
                atom = AtomicCondition.of(entity, op, value)
            except ModelError as exc:
                violations.append(f"phrases/{entity}/{key}: {exc}")
                continue
            out.setdefault(atom.entity, {})[f"{atom.op.value} {atom.value}"] = phrase
    return out
