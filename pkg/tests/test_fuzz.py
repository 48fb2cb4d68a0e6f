"""Seeded fuzz corpus: validator and engine must degrade into reports, never crash."""

import copy
import json
import random

from foilex.engine import Engine
from foilex.fixtures import FIXTURE_NAMES, fixture_path
from foilex.scenario import ScenarioParseError, load_document, parse_text, validate_document

CORPUS_SIZE = 1000
SEED = 7

JUNK = [None, True, False, 0, -1, 1.5, 1e308, float("nan"), "", " ", "x" * 300, "==", "2024-13-45T99:00:00Z",
        [], [1, 2], {}, {"and": []}, {"not": {"not": {}}}, {"entity": "", "op": "==", "value": ""}]


def _paths(node, prefix=()):
    yield prefix
    if isinstance(node, dict):
        for k, v in node.items():
            yield from _paths(v, prefix + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _paths(v, prefix + (i,))


def _parent(doc, path):
    for key in path[:-1]:
        doc = doc[key]
    return doc


def mutate(doc, rnd):
    doc = copy.deepcopy(doc)
    for _ in range(rnd.randint(1, 3)):
        paths = [p for p in _paths(doc) if p]
        if not paths:
            break
        path = rnd.choice(paths)
        parent, key = _parent(doc, path), path[-1]
        move = rnd.randrange(5)
        if move == 0:
            del parent[key]
        elif move == 1:
            parent[key] = copy.deepcopy(rnd.choice(JUNK))
        elif move == 2 and isinstance(parent, list):
            parent.insert(rnd.randrange(len(parent) + 1), copy.deepcopy(parent[key]))
        elif move == 3:
            parent[key] = {"not": parent[key]}
        elif isinstance(parent[key], str):
            parent[key] = parent[key].upper() if rnd.random() < 0.5 else parent[key][::-1]
        else:
            parent[key] = copy.deepcopy(rnd.choice(JUNK))
    return doc


def perturb(doc, rnd):
    """Keeps the document valid; varies what the engine sees."""
    doc = copy.deepcopy(doc)
    history = doc["history"]
    doc["history"] = [e for e in history if rnd.random() < 0.7]
    for rule in doc["rules"]:
        rule["enabled"] = rnd.random() < 0.8
    req = doc["request"]
    req["user"] = rnd.choice(doc["users"])["id"]
    req["device"] = rnd.choice(doc["devices"])["id"]
    if history:
        req["at"] = rnd.choice(history)["ts"]
    if rnd.random() < 0.2:
        req["fact_rule"] = rnd.choice(doc["rules"])["id"]
    return doc


def random_json(rnd, depth=0):
    roll = rnd.random()
    if depth > 4 or roll < 0.4:
        return copy.deepcopy(rnd.choice(JUNK))
    if roll < 0.7:
        return [random_json(rnd, depth + 1) for _ in range(rnd.randint(0, 4))]
    keys = ["users", "devices", "rules", "history", "request", "phrases", "id", "kind", rnd.choice("abc")]
    return {rnd.choice(keys): random_json(rnd, depth + 1) for _ in range(rnd.randint(0, 4))}


def corpus():
    rnd = random.Random(SEED)
    bases = [json.loads(fixture_path(n).read_text()) for n in FIXTURE_NAMES]
    for i in range(CORPUS_SIZE):
        kind = i % 10
        if kind < 3:
            yield "perturbed", json.dumps(perturb(rnd.choice(bases), rnd))
        elif kind < 6:
            yield "mutated", json.dumps(mutate(rnd.choice(bases), rnd), allow_nan=True)
        elif kind < 8:
            yield "random", json.dumps(random_json(rnd), allow_nan=True)
        elif kind == 8:
            text = json.dumps(rnd.choice(bases))
            yield "truncated", text[: rnd.randrange(len(text))]
        else:
            yield "nested", "[" * rnd.randint(500, 5000) + "]" * rnd.randint(0, 5000)


def run_case(text):
    """Returns 'parse-error', 'invalid', or the list of outcome statuses."""
    try:
        doc = parse_text(text)
    except ScenarioParseError:
        return "parse-error"
    if validate_document(doc):
        return "invalid"
    scenario = load_document(doc)
    engine = Engine(scenario)
    return [o.ok for o in engine.replay()]


def fuzz_summary():
    tally = {}
    crashes = []
    for i, (kind, text) in enumerate(corpus()):
        try:
            result = run_case(text)
        except Exception as exc:  # a crash is exactly what we're hunting for
            crashes.append((i, kind, repr(exc)))
            continue
        bucket = result if isinstance(result, str) else "engine-ran"
        tally[bucket] = tally.get(bucket, 0) + 1
    return tally, crashes


def test_fuzz_corpus_never_crashes():
    tally, crashes = fuzz_summary()
    assert not crashes, crashes[:5]
    assert sum(tally.values()) == CORPUS_SIZE
    # the corpus should exercise every path, not just the parser
    assert tally.get("parse-error", 0) > 0
    assert tally.get("invalid", 0) > 0
    assert tally.get("engine-ran", 0) > 0
