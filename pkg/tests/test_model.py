import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foilex.model import (
    And,
    AtomicCondition,
    ModelError,
    Not,
    Op,
    Or,
    canonical_literal,
    canonicalize,
    condition_from_json,
    condition_to_json,
    count_leaves,
    flatten_conditions,
    format_ts,
    parse_duration,
    parse_ts,
)

from oracles import leaves
from strategies import trees


def atom(e, op, v):
    return AtomicCondition.of(e, op, v)


def test_canonicalize_formatting():
    raw = AtomicCondition("Temp", Op.GT, "25.0")
    assert canonicalize(raw) == AtomicCondition("temp", Op.GT, "25")


def test_canonicalize_idempotent_example():
    c = AtomicCondition("temp", Op.GT, "25")
    assert canonicalize(c) == c


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("007", "7"),
        ("25.500", "25.5"),
        ("1e2", "100"),
        ("-0.0", "0"),
        (25.0, "25"),
        (3, "3"),
        (True, "true"),
        ("Open", "open"),
        ("  ON ", "on"),
        ("11:30", "11:30"),
    ],
)
def test_canonical_literal(raw, expected):
    assert canonical_literal(raw) == expected


@pytest.mark.parametrize("bad", ["", "   ", None, [1], float("nan"), float("inf")])
def test_malformed_literal(bad):
    with pytest.raises(ModelError):
        canonical_literal(bad)


def test_operator_aliases():
    assert atom("x", "greater-eq", 1).op is Op.GE
    assert atom("x", "not-equals", 1).op is Op.NE
    with pytest.raises(ModelError):
        atom("x", "~", 1)


def test_empty_entity_rejected():
    with pytest.raises(ModelError):
        atom("  ", "==", 1)


_values = st.one_of(
    st.integers(-10**6, 10**6),
    st.floats(allow_nan=False, allow_infinity=False, width=32),
    st.booleans(),
    st.text(alphabet="abcXYZ019.-e ", min_size=1, max_size=8).filter(lambda s: s.strip()),
)


@settings(max_examples=1000)
@given(
    entity=st.text(alphabet="abcABC_ ", min_size=1, max_size=6).filter(lambda s: s.strip()),
    op=st.sampled_from(list(Op)),
    value=_values,
)
def test_canonicalize_idempotent(entity, op, value):
    once = canonicalize(AtomicCondition(entity, op, value))
    assert canonicalize(once) == once


def test_flatten_dedupes():
    a, b = atom("a", "==", 1), atom("b", "==", 2)
    assert flatten_conditions(And((a, b, a))) == {a, b}
    assert flatten_conditions(a) == {a}


def test_flatten_nested_matches_tree_walk():
    tree = And((atom("temp", ">", 25), Or((atom("occupied", "==", True), atom("door", "==", "open")))))
    expected = set(leaves(tree))
    assert expected == {atom("temp", ">", 25), atom("occupied", "==", "true"), atom("door", "==", "open")}
    assert flatten_conditions(tree) == expected


def test_flatten_folds_not_into_operator():
    t = And((Not(atom("door", "==", "open")), Not(atom("temp", ">", 5))))
    assert flatten_conditions(t) == {atom("door", "!=", "open"), atom("temp", "<=", 5)}
    # opposite atoms do not collide
    assert len(flatten_conditions(Or((atom("door", "==", "open"), Not(atom("door", "==", "open")))))) == 2


@settings(max_examples=300)
@given(trees, st.randoms(use_true_random=False))
def test_flatten_properties(tree, rnd):
    flat = flatten_conditions(tree)
    assert len(flat) <= count_leaves(tree)
    assert flat == set(leaves(tree))
    assert flatten_conditions(_shuffle(tree, rnd)) == flat


def _shuffle(tree, rnd: random.Random):
    if isinstance(tree, (And, Or)):
        kids = [_shuffle(c, rnd) for c in tree.children]
        rnd.shuffle(kids)
        return type(tree)(tuple(kids))
    if isinstance(tree, Not):
        return Not(_shuffle(tree.child, rnd))
    return tree


def test_tree_arity():
    with pytest.raises(ModelError):
        And((atom("a", "==", 1),))
    with pytest.raises(ModelError):
        condition_from_json({"or": [{"entity": "a", "op": "==", "value": 1}]})


@given(trees)
def test_condition_json_roundtrip(tree):
    canon = condition_from_json(condition_to_json(tree))
    assert condition_from_json(condition_to_json(canon)) == canon


def test_timestamps():
    t = parse_ts("2024-05-14T14:05:00.123456+02:00")
    assert format_ts(t) == "2024-05-14T12:05:00.123Z"
    assert parse_ts(format_ts(t)) == t
    with pytest.raises(ModelError):
        parse_ts("2024-05-14T14:05:00")
    with pytest.raises(ModelError):
        parse_ts("yesterday")


def test_durations():
    assert parse_duration("60m").total_seconds() == 3600
    assert parse_duration("30d").days == 30
    assert parse_duration(90).total_seconds() == 90
    with pytest.raises(ModelError):
        parse_duration("soon")
