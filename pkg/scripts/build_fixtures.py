"""Regenerate the bundled office scenario files (src/foilex/data/scenarios).

Histories are synthetic: firings are spread evenly over the 30 days before
each request so that the frequency and occurrence counts come out exactly as
intended. A few older firings fall outside the counting window on purpose.

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "foilex" / "data" / "scenarios"
LIGHT = "meeting_room_status_light"
CEILING = "office_ceiling_lights"

USERS = [{"id": "alice", "name": "Alice"}, {"id": "bob", "name": "Bob"}]
DEVICES = [
    {"id": LIGHT, "name": "the meeting room status light"},
    {"id": CEILING, "name": "the office ceiling lights"},
]
ENTITIES = {
    "meeting_room_motion": "the meeting room motion sensor",
    "meeting_room_door": "the meeting room door contact sensor",
    "lunch_forecast": "the lunchtime weather forecast",
    "time": "the time",
}
PHRASES = {
    "meeting_room_motion": {
        "== true": "the occupancy of the meeting room was detected",
        "== false": "no motion was detected in the meeting room",
        "!= false": "there was motion in the meeting room",
        "!= true": "the occupancy of the meeting room was not detected",
    },
    "meeting_room_door": {
        "== closed": "the contact sensor for the meeting room door is turned off",
        "!= closed": "the contact sensor for the meeting room was not closed",
    },
    "lunch_forecast": {
        "== rain": "rain is expected at lunchtime",
        "!= rain": "no rain is expected at lunchtime",
        "== sunny": "sunny weather is expected at lunchtime",
        "!= sunny": "no sunny weather is expected at lunchtime",
    },
    "smoke_detector": {"== true": "smoke was detected", "!= true": "no smoke was detected"},
    "gas_alarm": {"== true": "the gas alarm went off", "!= true": "the gas alarm stayed silent"},
}
ERRORS = {"incorrect_installation": "incorrect installation"}


def atom(entity, op, value):
    return {"entity": entity, "op": op, "value": value}


RULES = [
    {
        "id": "meeting_room_not_occupied",
        "name": "Meeting room not occupied",
        "owner": "alice",
        "precondition": {"and": [atom("meeting_room_motion", "==", False), atom("meeting_room_door", "==", "closed")]},
        "actions": [{"device": LIGHT, "state": "green", "description": "the green light"}],
    },
    {
        "id": "meeting_room_occupied",
        "name": "Meeting room occupied",
        "owner": "alice",
        "precondition": {"and": [atom("meeting_room_motion", "==", True), atom("meeting_room_door", "==", "closed")]},
        "actions": [{"device": LIGHT, "state": "orange", "description": "the orange light"}],
    },
    {
        "id": "rain_at_lunch",
        "name": "Rain at lunch",
        "owner": "bob",
        "precondition": {"and": [atom("lunch_forecast", "==", "rain"), atom("time", "==", "11:30")]},
        "actions": [{"device": LIGHT, "state": "blue", "description": "the blue light"}],
    },
    {
        "id": "sun_at_lunch",
        "name": "Sun at lunch",
        "owner": "bob",
        "precondition": {"and": [atom("lunch_forecast", "==", "sunny"), atom("time", "==", "11:30")]},
        "actions": [{"device": LIGHT, "state": "orange", "description": "the orange light"}],
    },
    {
        "id": "danger",
        "name": "Danger",
        "owner": "alice",
        "precondition": {"or": [atom("smoke_detector", "==", True), atom("gas_alarm", "==", True)]},
        "actions": [{"device": LIGHT, "state": "orange", "description": "the orange light"}],
    },
    {
        "id": "closing_time",
        "name": "Closing time",
        "owner": "alice",
        "precondition": atom("time", "==", "18:00"),
        "actions": [
            {"device": LIGHT, "state": "off", "description": "the light turning off"},
            {"device": CEILING, "state": "off", "description": "the ceiling lights turning off"},
        ],
    },
]

# firings inside the 30-day window (frequency column)
FIRINGS = {
    "meeting_room_not_occupied": 65,
    "meeting_room_occupied": 40,
    "rain_at_lunch": 4,
    "sun_at_lunch": 6,
    "danger": 0,
    "closing_time": 90,
}
# firings 35-45 days before the request; must not be counted
STALE_FIRINGS = {"rain_at_lunch": 5, "danger": 2}
# explanation deliveries inside the window: (rule, user) -> count
DELIVERIES = {
    ("meeting_room_not_occupied", "alice"): 3,
    ("rain_at_lunch", "alice"): 4,
    ("rain_at_lunch", "bob"): 4,
    ("closing_time", "bob"): 2,
}


def ts(t: datetime) -> str:
    return t.strftime("%Y-%m-%dT%H:%M:%S.") + f"{t.microsecond // 1000:03d}Z"


def base_history(request_at: datetime) -> list[tuple[datetime, dict]]:
    """Events between request-30d+1h and request-3h, plus stale ones."""
    start = request_at - timedelta(days=30) + timedelta(hours=1)
    end = request_at - timedelta(hours=3)
    span = end - start
    events = []
    for k, (rule_id, count) in enumerate(FIRINGS.items()):
        for i in range(count):
            t = start + span * (i + 0.5) / count + timedelta(seconds=7 * k)
            events.append((t, {"kind": "rule_fired", "rule_id": rule_id}))
    for k, (rule_id, count) in enumerate(STALE_FIRINGS.items()):
        for i in range(count):
            t = request_at - timedelta(days=45) + timedelta(days=2 * i, minutes=k)
            events.append((t, {"kind": "rule_fired", "rule_id": rule_id}))
    for k, ((rule_id, user), count) in enumerate(DELIVERIES.items()):
        for i in range(count):
            t = start + span * (i + 0.5) / count + timedelta(minutes=3, seconds=11 * k)
            events.append((t, {"kind": "explanation_delivered", "rule_id": rule_id, "user": user, "device": LIGHT}))
    return events


def scenario(title: str, request: dict, history: list[tuple[datetime, dict]]) -> dict:
    history = sorted(history, key=lambda e: e[0])
    return {
        "title": title,
        "users": USERS,
        "devices": DEVICES,
        "entities": ENTITIES,
        "phrases": PHRASES,
        "errors": ERRORS,
        "rules": RULES,
        "history": [{"ts": ts(t), **payload} for t, payload in history],
        "request": request,
    }


def build() -> dict[str, dict]:
    out = {}

    # 1: Alice, orange light from the occupancy rule shortly before asking
    at = datetime(2024, 5, 14, 14, 5, tzinfo=timezone.utc)
    hist = base_history(at) + [(at - timedelta(minutes=25), {"kind": "rule_fired", "rule_id": "meeting_room_occupied"})]
    out["test1"] = scenario(
        "Test case 1: Alice sees the status light still orange after the meeting",
        {"user": "alice", "device": LIGHT, "at": ts(at)},
        hist,
    )

    # 2: Bob at lunchtime, meeting running, light orange
    at = datetime(2024, 5, 15, 11, 40, tzinfo=timezone.utc)
    hist = base_history(at) + [(at - timedelta(minutes=15), {"kind": "rule_fired", "rule_id": "meeting_room_occupied"})]
    out["test2"] = scenario(
        "Test case 2: Bob expects the rain reminder but sees orange",
        {"user": "bob", "device": LIGHT, "at": ts(at)},
        hist,
    )

    # 3: Bob late to a meeting; the occupancy rule fired but the light is miswired
    at = datetime(2024, 5, 16, 10, 12, tzinfo=timezone.utc)
    fired = at - timedelta(minutes=12)
    hist = base_history(at) + [
        (fired, {"kind": "rule_fired", "rule_id": "meeting_room_occupied"}),
        (fired + timedelta(seconds=2), {"kind": "error", "error_code": "incorrect_installation", "device": LIGHT}),
    ]
    out["test3"] = scenario(
        "Test case 3: the status light cannot be reached after maintenance",
        {"user": "bob", "device": LIGHT, "at": ts(at)},
        hist,
    )

    # 4: Alice in the morning; nothing touched the light since closing time
    at = datetime(2024, 5, 17, 8, 30, tzinfo=timezone.utc)
    out["test4"] = scenario(
        "Test case 4: the status light is off in the morning",
        {"user": "alice", "device": LIGHT, "at": ts(at)},
        base_history(at),
    )
    return out


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in build().items():
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(doc['history'])} events)")


if __name__ == "__main__":
    main()
