"""Append-only event log with the queries used by the expectation factors.

The log is either purely in memory or backed by an ``.ndjson`` file holding
one event object per line. Queries are linear scans over an immutable
snapshot, which is plenty for desk-scale histories.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping

from .model import (
    ErrorOccurred,
    ExplanationDelivered,
    ModelError,
    Rule,
    RuleFired,
    SystemEvent,
    to_utc_ms,
)


class HistoryError(Exception):
    pass


class OrderingError(HistoryError):
    """An event was appended with a timestamp earlier than the log's tail."""


class StorageError(HistoryError):
    pass


@dataclass(frozen=True)
class TimeWindow:
    start: datetime
    end: datetime

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", to_utc_ms(self.start))
        object.__setattr__(self, "end", to_utc_ms(self.end))
        if self.start > self.end:
            raise ValueError(f"window start {self.start} is after end {self.end}")

    def __contains__(self, ts: datetime) -> bool:
        return self.start <= ts <= self.end


def encode_event(event: SystemEvent) -> str:
    return json.dumps(event.to_json(), separators=(",", ":"), ensure_ascii=False)


def decode_event(line: str) -> SystemEvent:
    return SystemEvent.from_json(json.loads(line))


class EventLog:
    """Time-ordered sequence of :class:`SystemEvent`.

    One writer at a time (appends are serialized by a lock); readers work on
    tuples returned by :meth:`snapshot`, so they never observe a half-done
    append.
    """

    def __init__(self, events: Iterable[SystemEvent] = (), path: str | Path | None = None) -> None:
        self._lock = threading.Lock()
        self.path = Path(path) if path is not None else None
        self._events: tuple[SystemEvent, ...] = _ordered(events)

    @classmethod
    def open(cls, path: str | Path) -> "EventLog":
        """Load (or create) a file-backed log."""
        path = Path(path)
        events: list[SystemEvent] = []
        if path.exists():
            try:
                with path.open(encoding="utf-8") as fh:
                    for lineno, line in enumerate(fh, 1):
                        if not line.strip():
                            continue
                        try:
                            events.append(decode_event(line))
                        except (ValueError, ModelError) as exc:
                            raise StorageError(f"{path}:{lineno}: {exc}") from exc
            except OSError as exc:
                raise StorageError(str(exc)) from exc
        return cls(events, path=path)

    @staticmethod
    def _check_order(event: SystemEvent, events: tuple[SystemEvent, ...]) -> None:
        if events and event.timestamp < events[-1].timestamp:
            raise OrderingError(
                f"event at {event.timestamp.isoformat()} precedes log tail at "
                f"{events[-1].timestamp.isoformat()}"
            )

    def append(self, event: SystemEvent) -> None:
        with self._lock:
            self._check_order(event, self._events)
            if self.path is not None:
                try:
                    with self.path.open("a", encoding="utf-8") as fh:
                        fh.write(encode_event(event) + "\n")
                        fh.flush()
                except OSError as exc:
                    raise StorageError(str(exc)) from exc
            self._events = self._events + (event,)

    def snapshot(self) -> tuple[SystemEvent, ...]:
        return self._events

    def copy(self) -> "EventLog":
        """In-memory copy; later appends to either log are independent."""
        log = EventLog()
        log._events = self._events
        return log

    def dump(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for event in self._events:
                fh.write(encode_event(event) + "\n")

    @property
    def last_timestamp(self) -> datetime | None:
        events = self._events
        return events[-1].timestamp if events else None

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self):
        return iter(self._events)

    # --- queries ------------------------------------------------------------

    def count_fired(self, rule_id: str, window: TimeWindow) -> int:
        return sum(
            1
            for e in self._events
            if isinstance(e.kind, RuleFired) and e.kind.rule_id == rule_id and e.timestamp in window
        )

    def count_explained(self, rule_id: str, user: str | None, window: TimeWindow) -> int:
        """Deliveries of explanations about ``rule_id``; ``user=None`` counts everyone."""
        return sum(
            1
            for e in self._events
            if isinstance(e.kind, ExplanationDelivered)
            and e.kind.rule_id == rule_id
            and (user is None or e.kind.user == user)
            and e.timestamp in window
        )

    def last_event_for_device(
        self,
        device: str,
        before: datetime,
        window: TimeWindow,
        rules: Mapping[str, Rule],
    ) -> SystemEvent | None:
        """Latest firing/error touching ``device`` at or before ``before`` inside ``window``.

        Firings of rule ids missing from ``rules`` are returned too, so the
        caller can report the integrity problem instead of silently skipping.
        """
        for e in reversed(self._events):
            if e.timestamp > before or e.timestamp not in window:
                continue
            if _involves(e, device, rules):
                return e
        return None

    def last_rule_before(self, device: str, t: datetime, rules: Mapping[str, Rule]) -> str | None:
        for e in reversed(self._events):
            if e.timestamp >= t or not isinstance(e.kind, RuleFired):
                continue
            rule = rules.get(e.kind.rule_id)
            if rule is not None and rule.targets(device):
                return rule.id
        return None


def _ordered(events: Iterable[SystemEvent]) -> tuple[SystemEvent, ...]:
    out = tuple(events)
    for prev, event in zip(out, out[1:]):
        if event.timestamp < prev.timestamp:
            raise OrderingError(f"event at {event.timestamp.isoformat()} precedes {prev.timestamp.isoformat()}")
    return out


def _involves(event: SystemEvent, device: str, rules: Mapping[str, Rule]) -> bool:
    kind = event.kind
    if isinstance(kind, ErrorOccurred):
        return kind.device == device
    if isinstance(kind, RuleFired):
        rule = rules.get(kind.rule_id)
        return rule is None or rule.targets(device)
    return False
