"""Determine the happened event for a request and classify the confusing case."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Mapping, Union

from .history import EventLog, TimeWindow
from .model import ErrorOccurred, ExplanationRequest, Rule, RuleFired, format_ts


class IntegrityError(Exception):
    """The history references something the rule set does not know about."""


class ConfusingCase(str, enum.Enum):
    CC1 = "CC1"  # an action occurred, another was expected
    CC2 = "CC2"  # nothing occurred, an action was expected
    CC3 = "CC3"  # an error occurred, an action was expected


@dataclass(frozen=True)
class FiredFact:
    rule: Rule
    at: datetime

    def to_json(self) -> dict:
        return {"variant": "rule_fired", "rule_id": self.rule.id, "at": format_ts(self.at)}


@dataclass(frozen=True)
class ErrorFact:
    code: str
    device: str
    at: datetime

    def to_json(self) -> dict:
        return {"variant": "error", "code": self.code, "device": self.device, "at": format_ts(self.at)}


@dataclass(frozen=True)
class NothingFact:
    def to_json(self) -> dict:
        return {"variant": "nothing"}


HappenedEvent = Union[FiredFact, ErrorFact, NothingFact]
NOTHING = NothingFact()


def determine_fact(
    log: EventLog,
    rules: Mapping[str, Rule],
    req: ExplanationRequest,
    recency: timedelta,
) -> HappenedEvent:
    """Find the most recent event on ``req.device`` within ``recency`` of the request.

    If the request names a ``fact_rule`` explicitly, that rule's latest firing
    (within the same horizon) is the fact instead.
    """
    window = TimeWindow(req.at - recency, req.at)
    if req.fact_rule is not None:
        rule = rules.get(req.fact_rule)
        if rule is None:
            raise IntegrityError(f"requested fact rule {req.fact_rule!r} is not defined")
        for e in reversed(log.snapshot()):
            if (
                isinstance(e.kind, RuleFired)
                and e.kind.rule_id == rule.id
                and e.timestamp in window
            ):
                return FiredFact(rule, e.timestamp)
        return NOTHING

    event = log.last_event_for_device(req.device, req.at, window, rules)
    if event is None:
        return NOTHING
    kind = event.kind
    if isinstance(kind, RuleFired):
        rule = rules.get(kind.rule_id)
        if rule is None:
            raise IntegrityError(f"history references unknown rule {kind.rule_id!r}")
        return FiredFact(rule, event.timestamp)
    assert isinstance(kind, ErrorOccurred)
    return ErrorFact(kind.error_code, kind.device, event.timestamp)


def classify(fact: HappenedEvent) -> ConfusingCase:
    if isinstance(fact, FiredFact):
        return ConfusingCase.CC1
    if isinstance(fact, ErrorFact):
        return ConfusingCase.CC3
    if isinstance(fact, NothingFact):
        return ConfusingCase.CC2
    raise TypeError(f"not a happened event: {fact!r}")
