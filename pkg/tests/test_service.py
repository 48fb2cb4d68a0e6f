import json
import threading
import urllib.error
import urllib.request

import pytest

from foilex.engine import Engine
from foilex.fixtures import load_fixture
from foilex.service import make_server

LIGHT = "meeting_room_status_light"


@pytest.fixture
def base_url():
    engine = Engine(load_fixture("test1"))
    server = make_server(engine, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    server.server_close()


def call(url, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=5) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def test_rules(base_url):
    status, rules = call(base_url + "/rules")
    assert status == 200
    assert {r["id"] for r in rules} >= {"meeting_room_occupied", "closing_time"}


def test_explanation_round_trip(base_url):
    body = {"user": "alice", "device": LIGHT, "at": "2024-05-14T14:05:00Z"}
    status, out = call(base_url + "/explanations", body)
    assert status == 200
    assert out["explanation"]["foil_rule"] == "meeting_room_not_occupied"
    status, events = call(base_url + f"/history?device={LIGHT}")
    assert status == 200
    assert events[-1]["kind"] == "explanation_delivered"
    assert events[-1]["user"] == "alice"


def test_history_filter(base_url):
    _, everything = call(base_url + "/history")
    _, ceiling = call(base_url + "/history?device=office_ceiling_lights")
    assert 0 < len(ceiling) < len(everything)
    assert all(e.get("rule_id") == "closing_time" for e in ceiling)


def test_bad_requests(base_url):
    assert call(base_url + "/explanations", {"user": "alice"})[0] == 400
    assert call(base_url + "/explanations", ["nope"])[0] == 400
    status, out = call(base_url + "/explanations", {"user": "mallory", "device": LIGHT})
    assert status == 400 and out["failure"]["reason"] == "unknown-user"
    assert call(base_url + "/nowhere")[0] == 404
