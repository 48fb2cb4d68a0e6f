"""Contrastive explanation rendering.

Each confusing case has one sentence skeleton::

    CC1  <fact action> occurred instead of <foil action> because <fact precondition>
    CC2  <foil action> did not occur because <negated foil precondition>
    CC3  <foil action> did not occur because error <error> occurred.

Slots are filled from the scenario vocabulary (device names, per-condition
phrases, error descriptions) with mechanical fallbacks. The filled skeleton
can optionally be sent to a rephrasing endpoint for grammatical polish.
"""

from __future__ import annotations

import json
import logging
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Mapping

from .facts import ConfusingCase, ErrorFact, FiredFact, HappenedEvent, NothingFact
from .model import Action, And, AtomicCondition, ConditionTree, Not, Or, Rule, canonicalize
from .scoring import DecisionMatrix
from .topsis import RankingResult

log = logging.getLogger(__name__)

REPHRASE_INSTRUCTION = (
    "Rewrite the following explanation so that it is a grammatically correct, "
    "natural English sentence. Do not add, drop or change any information."
)


class RenderError(ValueError):
    """Case and fact do not fit together."""


def negate(tree: ConditionTree) -> ConditionTree:
    """Push a negation down to the atoms (De Morgan); the result has no NOT nodes."""
    return _nnf(tree, True)


def nnf(tree: ConditionTree) -> ConditionTree:
    """Negation normal form of ``tree`` with canonical atoms."""
    return _nnf(tree, False)


def _nnf(tree: ConditionTree, negated: bool) -> ConditionTree:
    if isinstance(tree, AtomicCondition):
        atom = canonicalize(tree)
        return atom.inverted() if negated else atom
    if isinstance(tree, Not):
        return _nnf(tree.child, not negated)
    children = tuple(_nnf(c, negated) for c in tree.children)
    if isinstance(tree, And):
        return Or(children) if negated else And(children)
    if isinstance(tree, Or):
        return And(children) if negated else Or(children)
    raise TypeError(f"not a condition tree: {tree!r}")


@dataclass(frozen=True)
class Vocabulary:
    """Human-readable names used to fill explanation slots.

    ``phrases`` maps an entity to ``{"<op> <value>": phrase}`` using canonical
    operator symbols and values, e.g. ``{"door": {"== closed": "the door is shut"}}``.
    """

    device_names: Mapping[str, str] = field(default_factory=dict)
    entity_names: Mapping[str, str] = field(default_factory=dict)
    phrases: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    errors: Mapping[str, str] = field(default_factory=dict)

    def device(self, device: str) -> str:
        return self.device_names.get(device) or device.replace("_", " ")

    def entity(self, entity: str) -> str:
        return self.entity_names.get(entity) or self.device_names.get(entity) or entity.replace("_", " ")

    def condition(self, atom: AtomicCondition) -> str:
        phrase = self.phrases.get(atom.entity, {}).get(f"{atom.op.value} {atom.value}")
        if phrase:
            return phrase
        return f"{self.entity(atom.entity)} {atom.op.words} {atom.value}"

    def action(self, action: Action) -> str:
        return action.description or f"{action.state} on {self.device(action.device)}"

    def error(self, code: str) -> str:
        return self.errors.get(code) or code.replace("_", " ")


def _phrase_tree(tree: ConditionTree, vocab: Vocabulary, nested: bool = False) -> str:
    if isinstance(tree, AtomicCondition):
        return vocab.condition(tree)
    if isinstance(tree, Not):
        # only reachable for callers bypassing nnf()
        return f"not ({_phrase_tree(tree.child, vocab, True)})"
    joiner = " and " if isinstance(tree, And) else " or "
    text = joiner.join(_phrase_tree(c, vocab, True) for c in tree.children)
    return f"({text})" if nested else text


def phrase_conditions(tree: ConditionTree, vocab: Vocabulary) -> str:
    return _phrase_tree(nnf(tree), vocab)


def _phrase_actions(rule: Rule, device: str, vocab: Vocabulary) -> str:
    actions = rule.actions_on(device) or rule.actions
    return " and ".join(vocab.action(a) for a in actions)


def _sentence(text: str) -> str:
    text = text.strip()
    if not text.endswith("."):
        text += "."
    return text[:1].upper() + text[1:]


def render(
    case: ConfusingCase,
    fact: HappenedEvent,
    foil: Rule,
    device: str,
    vocab: Vocabulary | None = None,
) -> str:
    """Instantiate the skeleton for ``case``; deterministic for equal inputs."""
    vocab = vocab or Vocabulary()
    expected = _phrase_actions(foil, device, vocab)
    if case is ConfusingCase.CC1:
        if not isinstance(fact, FiredFact):
            raise RenderError("CC1 needs a fired rule as fact")
        fact_states = {a.canonical_state for a in fact.rule.actions_on(device)}
        foil_states = {a.canonical_state for a in foil.actions_on(device)}
        if fact_states and foil_states and foil_states <= fact_states:
            raise RenderError("foil action equals the fact action")
        happened = _phrase_actions(fact.rule, device, vocab)
        reason = phrase_conditions(fact.rule.precondition, vocab)
        return _sentence(f"{happened} occurred instead of {expected} because {reason}")
    if case is ConfusingCase.CC2:
        if not isinstance(fact, NothingFact):
            raise RenderError("CC2 needs an empty fact")
        reason = _phrase_tree(negate(foil.precondition), vocab)
        return _sentence(f"{expected} did not occur because {reason}")
    if case is ConfusingCase.CC3:
        if not isinstance(fact, ErrorFact):
            raise RenderError("CC3 needs an error fact")
        error = f"{vocab.error(fact.code)} in {vocab.device(fact.device)}"
        return _sentence(f"{expected} did not occur because error {error} occurred.")
    raise RenderError(f"unknown case {case!r}")


@dataclass(frozen=True)
class RephraseConfig:
    endpoint: str | None = None
    token: str | None = None
    timeout: float = 5.0


def polish(text: str, config: RephraseConfig | None) -> tuple[str, bool]:
    """Return ``(text, polished)``; falls back to the input on any failure."""
    if config is None or not config.endpoint:
        return text, False
    body = json.dumps({"pattern": text, "instruction": REPHRASE_INSTRUCTION}).encode()
    headers = {"Content-Type": "application/json"}
    if config.token:
        headers["Authorization"] = f"Bearer {config.token}"
    request = urllib.request.Request(config.endpoint, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(request, timeout=config.timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
    except (urllib.error.URLError, OSError, ValueError) as exc:
        log.warning("rephrasing failed, keeping pattern text: %s", exc)
        return text, False
    result = payload.get("text") if isinstance(payload, dict) else None
    if not isinstance(result, str) or not result.strip():
        log.warning("rephrasing endpoint returned no text, keeping pattern text")
        return text, False
    return result, True


@dataclass(frozen=True)
class Explanation:
    text: str
    case: ConfusingCase
    fact: HappenedEvent
    foil_rule: Rule
    pattern_fill: str
    polished: bool = False
    matrix: DecisionMatrix | None = None
    ranking: RankingResult | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "text": self.text,
            "case": self.case.value,
            "fact": self.fact.to_json(),
            "foil_rule": self.foil_rule.id,
            "foil_rule_name": self.foil_rule.name,
            "pattern_fill": self.pattern_fill,
            "polished": self.polished,
        }
        if self.matrix is not None:
            out["trace"] = {
                "matrix": self.matrix.to_json(),
                "ranking": self.ranking.to_json() if self.ranking is not None else None,
            }
        else:
            out["trace"] = None
        return out
