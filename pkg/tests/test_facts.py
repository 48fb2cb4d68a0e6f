from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foilex.facts import (
    NOTHING,
    ConfusingCase,
    ErrorFact,
    FiredFact,
    IntegrityError,
    NothingFact,
    classify,
    determine_fact,
)
from foilex.fixtures import load_fixture
from foilex.history import EventLog
from foilex.model import ExplanationRequest, RuleFired, SystemEvent

from strategies import DEVICES, EPOCH, USERS, event_logs, minutes, rule_sets

LIGHT = "meeting_room_status_light"
HOUR = timedelta(minutes=60)


def test_fired_fact_test1():
    sc = load_fixture("test1")
    fact = determine_fact(sc.log, sc.rules, sc.requests[0], HOUR)
    assert isinstance(fact, FiredFact)
    assert fact.rule.id == "meeting_room_occupied"


def test_nothing_fact_test4():
    sc = load_fixture("test4")
    assert determine_fact(sc.log, sc.rules, sc.requests[0], HOUR) is NOTHING


def test_error_fact_test3():
    sc = load_fixture("test3")
    fact = determine_fact(sc.log, sc.rules, sc.requests[0], HOUR)
    assert isinstance(fact, ErrorFact)
    assert fact.code == "incorrect_installation"


def test_later_firing_beats_earlier_error():
    sc = load_fixture("test3")
    req = sc.requests[0]
    log = sc.log.copy()
    log.append(SystemEvent(req.at - timedelta(minutes=1), RuleFired("danger")))
    fact = determine_fact(log, sc.rules, req, HOUR)
    assert isinstance(fact, FiredFact) and fact.rule.id == "danger"


def test_unknown_rule_in_history_is_integrity_error():
    sc = load_fixture("test4")
    req = sc.requests[0]
    log = sc.log.copy()
    log.append(SystemEvent(req.at - timedelta(minutes=5), RuleFired("deleted_rule")))
    with pytest.raises(IntegrityError):
        determine_fact(log, sc.rules, req, HOUR)


def test_explicit_fact_rule():
    sc = load_fixture("test2")
    req = sc.requests[0]
    override = ExplanationRequest(req.user, req.device, req.at, fact_rule="meeting_room_occupied")
    fact = determine_fact(sc.log, sc.rules, override, HOUR)
    assert isinstance(fact, FiredFact) and fact.rule.id == "meeting_room_occupied"
    with pytest.raises(IntegrityError):
        determine_fact(sc.log, sc.rules, ExplanationRequest(req.user, req.device, req.at, "nope"), HOUR)


def test_classify_is_total():
    sc = load_fixture("test1")
    assert classify(FiredFact(sc.rules["danger"], EPOCH)) is ConfusingCase.CC1
    assert classify(NothingFact()) is ConfusingCase.CC2
    assert classify(ErrorFact("x", LIGHT, EPOCH)) is ConfusingCase.CC3
    with pytest.raises(TypeError):
        classify("fired")


@settings(max_examples=300)
@given(st.data())
def test_zero_recency_only_sees_exact_timestamp(data):
    rules = data.draw(rule_sets())
    events = data.draw(event_logs(list(rules)))
    log = EventLog(events)
    at = data.draw(minutes)
    device = data.draw(st.sampled_from(DEVICES))
    req = ExplanationRequest(data.draw(st.sampled_from(USERS)), device, at)
    fact = determine_fact(log, rules, req, timedelta(0))
    if not isinstance(fact, NothingFact):
        assert fact.at == at
    # facts never come from explanation deliveries
    fact = determine_fact(log, rules, req, timedelta(days=30))
    assert isinstance(fact, (FiredFact, ErrorFact, NothingFact))
