"""Candidate selection and the expectation-factor decision matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .facts import ConfusingCase, FiredFact, HappenedEvent, NothingFact
from .history import EventLog, TimeWindow
from .model import Rule, flatten_conditions

SIMILARITY = "precondition_similarity"
OWNERSHIP = "ownership"
FREQUENCY = "frequency"
OCCURRENCE = "occurrence"

CRITERIA = {
    ConfusingCase.CC1: (SIMILARITY, OWNERSHIP, FREQUENCY, OCCURRENCE),
    ConfusingCase.CC2: (OWNERSHIP, FREQUENCY, OCCURRENCE),
}


class NoCandidateError(Exception):
    """No rule could have produced an alternative outcome on the device."""


@dataclass(frozen=True)
class DecisionMatrix:
    candidates: tuple[str, ...]
    criteria: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.candidates), len(self.criteria)):
            raise ValueError(f"matrix shape {values.shape} does not match labels")
        if not self.candidates:
            raise ValueError("decision matrix needs at least one candidate")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("decision matrix values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.criteria.index(name)]

    def to_json(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "criteria": list(self.criteria),
            "values": self.values.tolist(),
        }


def candidate_rules(rules: Iterable[Rule], device: str, fact: HappenedEvent) -> list[Rule]:
    """Enabled rules acting on ``device``.

    For a fired fact the happened rule and every rule that would put the device
    into the same state are dropped: they cannot be the expected alternative.
    """
    excluded_states: set[str] = set()
    happened_id = None
    if isinstance(fact, FiredFact):
        happened_id = fact.rule.id
        excluded_states = {a.canonical_state for a in fact.rule.actions_on(device)}
    elif not isinstance(fact, NothingFact):
        raise ValueError("candidate selection only applies to fired or empty facts")

    out = []
    for rule in rules:
        if not rule.enabled or rule.id == happened_id:
            continue
        states = {a.canonical_state for a in rule.actions_on(device)}
        if not states:
            continue
        if excluded_states and states <= excluded_states:
            continue
        out.append(rule)
    if not out:
        raise NoCandidateError(f"no candidate rule acts on {device!r}")
    return out


def jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def precondition_similarity(candidate: Rule, happened: Rule) -> float:
    return jaccard(flatten_conditions(candidate.precondition), flatten_conditions(happened.precondition))


def ownership(candidate: Rule, user: str) -> int:
    return int(candidate.owner == user)


def build_matrix(
    candidates: Sequence[Rule],
    case: ConfusingCase,
    log: EventLog,
    user: str,
    window: TimeWindow,
    happened_rule: Rule | None = None,
    occurrence_per_user: bool = True,
) -> DecisionMatrix:
    if case not in CRITERIA:
        raise ValueError(f"no decision matrix for {case.value}")
    if (case is ConfusingCase.CC1) != (happened_rule is not None):
        raise ValueError("a happened rule is required for CC1 and only for CC1")
    if not candidates:
        raise NoCandidateError("empty candidate list")

    criteria = CRITERIA[case]
    rows = []
    for rule in candidates:
        scores = {
            OWNERSHIP: ownership(rule, user),
            FREQUENCY: log.count_fired(rule.id, window),
            OCCURRENCE: log.count_explained(rule.id, user if occurrence_per_user else None, window),
        }
        if happened_rule is not None:
            scores[SIMILARITY] = precondition_similarity(rule, happened_rule)
        rows.append([float(scores[c]) for c in criteria])
    return DecisionMatrix(tuple(r.id for r in candidates), criteria, np.array(rows, dtype=float))
