"""Core vocabulary: conditions, rules, actions, events and requests.

All types are frozen dataclasses so they can be shared freely between
threads and used as set members / dict keys.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from decimal import Decimal, InvalidOperation
from typing import Any, Iterator, Union


class ModelError(ValueError):
    """Raised for malformed domain values (bad literal, bad tree shape...)."""


class Op(str, enum.Enum):
    EQ = "=="
    NE = "!="
    GT = ">"
    LT = "<"
    GE = ">="
    LE = "<="

    @property
    def inverse(self) -> "Op":
        return _INVERSE[self]

    @property
    def words(self) -> str:
        return _WORDS[self]


_INVERSE = {
    Op.EQ: Op.NE,
    Op.NE: Op.EQ,
    Op.GT: Op.LE,
    Op.LE: Op.GT,
    Op.LT: Op.GE,
    Op.GE: Op.LT,
}

_WORDS = {
    Op.EQ: "is",
    Op.NE: "is not",
    Op.GT: "is greater than",
    Op.LT: "is less than",
    Op.GE: "is at least",
    Op.LE: "is at most",
}

_OP_ALIASES = {
    "equals": Op.EQ,
    "eq": Op.EQ,
    "=": Op.EQ,
    "not-equals": Op.NE,
    "ne": Op.NE,
    "greater": Op.GT,
    "gt": Op.GT,
    "less": Op.LT,
    "lt": Op.LT,
    "greater-eq": Op.GE,
    "ge": Op.GE,
    "less-eq": Op.LE,
    "le": Op.LE,
}


def parse_op(raw: str | Op) -> Op:
    if isinstance(raw, Op):
        return raw
    if not isinstance(raw, str):
        raise ModelError(f"operator must be a string, got {raw!r}")
    key = raw.strip().lower()
    try:
        return Op(key)
    except ValueError:
        pass
    try:
        return _OP_ALIASES[key]
    except KeyError:
        raise ModelError(f"unknown operator {raw!r}") from None


def canonical_literal(value: Any) -> str:
    """Normalize a scalar literal to its canonical string form.

    Booleans become ``"true"``/``"false"``, numbers (and numeric strings) lose
    leading zeros, trailing fraction zeros and exponent notation, other strings
    are stripped and case-folded.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            raise ModelError(f"non-finite numeric literal {value!r}")
        return _format_decimal(Decimal(repr(value)) if isinstance(value, float) else Decimal(value))
    if not isinstance(value, str):
        raise ModelError(f"literal must be a string, number or boolean, got {value!r}")
    text = value.strip()
    if not text:
        raise ModelError("empty literal")
    number = _maybe_number(text)
    if number is not None:
        return _format_decimal(number)
    return text.casefold()


def _maybe_number(text: str) -> Decimal | None:
    if not any(ch.isdigit() for ch in text):
        return None
    if not all(ch.isdigit() or ch in "+-.eE" for ch in text):
        return None
    try:
        number = Decimal(text)
    except InvalidOperation:
        return None
    if not number.is_finite():
        return None
    return number


def _format_decimal(number: Decimal) -> str:
    if number.is_zero():
        return "0"
    try:
        number = number.normalize()
    except ArithmeticError:
        raise ModelError(f"numeric literal out of range: {number}") from None
    # Keep huge/tiny magnitudes in exponent form instead of expanding them.
    if not -40 <= number.adjusted() <= 40:
        return str(number)
    text = format(number, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


@dataclass(frozen=True, order=True)
class AtomicCondition:
    entity: str
    op: Op
    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.entity, str) or not self.entity.strip():
            raise ModelError("condition entity must be non-empty")

    @classmethod
    def of(cls, entity: str, op: str | Op, value: Any) -> "AtomicCondition":
        """Build an atom in canonical form from loose inputs."""
        return canonicalize(cls(str(entity), parse_op(op), value))

    def inverted(self) -> "AtomicCondition":
        return AtomicCondition(self.entity, self.op.inverse, self.value)

    @property
    def key(self) -> str:
        return f"{self.entity} {self.op.value} {self.value}"

    def __str__(self) -> str:
        return self.key


def canonicalize(c: AtomicCondition) -> AtomicCondition:
    """Return the canonical form of an atom (idempotent)."""
    entity = c.entity.strip().casefold()
    if not entity:
        raise ModelError("condition entity must be non-empty")
    return AtomicCondition(entity, parse_op(c.op), canonical_literal(c.value))


@dataclass(frozen=True)
class And:
    children: tuple["ConditionTree", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ModelError("AND needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["ConditionTree", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ModelError("OR needs at least two children")


@dataclass(frozen=True)
class Not:
    child: "ConditionTree"


ConditionTree = Union[AtomicCondition, And, Or, Not]


def iter_leaves(tree: ConditionTree, negated: bool = False) -> Iterator[AtomicCondition]:
    """Yield canonical leaves with enclosing negations folded into the operator."""
    if isinstance(tree, AtomicCondition):
        atom = canonicalize(tree)
        yield atom.inverted() if negated else atom
    elif isinstance(tree, Not):
        yield from iter_leaves(tree.child, not negated)
    elif isinstance(tree, (And, Or)):
        for child in tree.children:
            yield from iter_leaves(child, negated)
    else:
        raise ModelError(f"not a condition tree: {tree!r}")


def flatten_conditions(tree: ConditionTree) -> frozenset[AtomicCondition]:
    """Set of unique atomic conditions in ``tree``, logical structure discarded."""
    return frozenset(iter_leaves(tree))


def count_leaves(tree: ConditionTree) -> int:
    if isinstance(tree, AtomicCondition):
        return 1
    if isinstance(tree, Not):
        return count_leaves(tree.child)
    return sum(count_leaves(child) for child in tree.children)


def condition_from_json(obj: Any) -> ConditionTree:
    if not isinstance(obj, dict):
        raise ModelError(f"condition must be an object, got {type(obj).__name__}")
    if "and" in obj:
        return And(tuple(condition_from_json(c) for c in _as_list(obj["and"], "and")))
    if "or" in obj:
        return Or(tuple(condition_from_json(c) for c in _as_list(obj["or"], "or")))
    if "not" in obj:
        return Not(condition_from_json(obj["not"]))
    try:
        return AtomicCondition.of(obj["entity"], obj["op"], obj["value"])
    except KeyError as exc:
        raise ModelError(f"condition atom missing field {exc.args[0]!r}") from None


def _as_list(value: Any, name: str) -> list:
    if not isinstance(value, list):
        raise ModelError(f"'{name}' must hold a list")
    return value


def condition_to_json(tree: ConditionTree) -> dict:
    if isinstance(tree, AtomicCondition):
        return {"entity": tree.entity, "op": tree.op.value, "value": tree.value}
    if isinstance(tree, And):
        return {"and": [condition_to_json(c) for c in tree.children]}
    if isinstance(tree, Or):
        return {"or": [condition_to_json(c) for c in tree.children]}
    return {"not": condition_to_json(tree.child)}


@dataclass(frozen=True)
class Action:
    device: str
    state: str
    description: str | None = None

    def __post_init__(self) -> None:
        if not self.device:
            raise ModelError("action device must be non-empty")
        if not self.state:
            raise ModelError("action state must be non-empty")

    @property
    def canonical_state(self) -> str:
        return canonical_literal(self.state)


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    owner: str
    precondition: ConditionTree
    actions: tuple[Action, ...]
    enabled: bool = True

    def __post_init__(self) -> None:
        if not self.id:
            raise ModelError("rule id must be non-empty")
        if not self.actions:
            raise ModelError(f"rule {self.id!r} has no actions")

    def actions_on(self, device: str) -> tuple[Action, ...]:
        return tuple(a for a in self.actions if a.device == device)

    def targets(self, device: str) -> bool:
        return any(a.device == device for a in self.actions)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "owner": self.owner,
            "enabled": self.enabled,
            "precondition": condition_to_json(self.precondition),
            "actions": [
                {k: v for k, v in (("device", a.device), ("state", a.state), ("description", a.description)) if v is not None}
                for a in self.actions
            ],
        }


# --- events -----------------------------------------------------------------


@dataclass(frozen=True)
class RuleFired:
    rule_id: str


@dataclass(frozen=True)
class ErrorOccurred:
    error_code: str
    device: str


@dataclass(frozen=True)
class ExplanationDelivered:
    rule_id: str
    user: str
    device: str


EventKind = Union[RuleFired, ErrorOccurred, ExplanationDelivered]


@dataclass(frozen=True)
class SystemEvent:
    timestamp: datetime
    kind: EventKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "timestamp", to_utc_ms(self.timestamp))

    def to_json(self) -> dict:
        out: dict[str, Any] = {"ts": format_ts(self.timestamp)}
        kind = self.kind
        if isinstance(kind, RuleFired):
            out.update(kind="rule_fired", rule_id=kind.rule_id)
        elif isinstance(kind, ErrorOccurred):
            out.update(kind="error", error_code=kind.error_code, device=kind.device)
        else:
            out.update(kind="explanation_delivered", rule_id=kind.rule_id, user=kind.user, device=kind.device)
        return out

    @classmethod
    def from_json(cls, obj: Any) -> "SystemEvent":
        if not isinstance(obj, dict):
            raise ModelError("event must be an object")
        try:
            ts = parse_ts(obj["ts"])
            tag = obj["kind"]
            if tag == "rule_fired":
                kind: EventKind = RuleFired(_str(obj["rule_id"]))
            elif tag == "error":
                kind = ErrorOccurred(_str(obj["error_code"]), _str(obj["device"]))
            elif tag == "explanation_delivered":
                kind = ExplanationDelivered(_str(obj["rule_id"]), _str(obj["user"]), _str(obj["device"]))
            else:
                raise ModelError(f"unknown event kind {tag!r}")
        except KeyError as exc:
            raise ModelError(f"event missing field {exc.args[0]!r}") from None
        return cls(ts, kind)


def _str(value: Any) -> str:
    if not isinstance(value, str) or not value:
        raise ModelError(f"expected non-empty string, got {value!r}")
    return value


@dataclass(frozen=True)
class ExplanationRequest:
    user: str
    device: str
    at: datetime
    # Optional explicit fact: the rule the user is asking about.
    fact_rule: str | None = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "at", to_utc_ms(self.at))

    def to_json(self) -> dict:
        out = {"user": self.user, "device": self.device, "at": format_ts(self.at)}
        if self.fact_rule is not None:
            out["fact_rule"] = self.fact_rule
        return out

    @classmethod
    def from_json(cls, obj: Any) -> "ExplanationRequest":
        if not isinstance(obj, dict):
            raise ModelError("request must be an object")
        try:
            fact_rule = obj.get("fact_rule")
            return cls(_str(obj["user"]), _str(obj["device"]), parse_ts(obj["at"]),
                       None if fact_rule is None else _str(fact_rule))
        except KeyError as exc:
            raise ModelError(f"request missing field {exc.args[0]!r}") from None


# --- time helpers -------------------------------------------------------------


def to_utc_ms(ts: datetime) -> datetime:
    if not isinstance(ts, datetime):
        raise ModelError(f"expected datetime, got {ts!r}")
    if ts.tzinfo is None:
        raise ModelError("timestamps must be timezone-aware")
    ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=ts.microsecond - ts.microsecond % 1000)


def parse_ts(raw: Any) -> datetime:
    """Parse an RFC 3339 timestamp (``Z`` or numeric offset required)."""
    if not isinstance(raw, str):
        raise ModelError(f"timestamp must be a string, got {raw!r}")
    text = raw.strip()
    if text[-1:] in ("Z", "z"):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise ModelError(f"bad RFC 3339 timestamp {raw!r}") from None
    if ts.tzinfo is None:
        raise ModelError(f"timestamp {raw!r} lacks a UTC offset")
    return to_utc_ms(ts)


def format_ts(ts: datetime) -> str:
    ts = to_utc_ms(ts)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


_DURATION_UNITS = {"ms": 0.001, "s": 1, "m": 60, "h": 3600, "d": 86400}


def parse_duration(raw: Any) -> timedelta:
    """Parse ``"60m"``, ``"30d"``, ``"1.5h"`` or a bare number of seconds."""
    if isinstance(raw, timedelta):
        return raw
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return timedelta(seconds=raw)
    if isinstance(raw, str):
        text = raw.strip().lower()
        for unit in sorted(_DURATION_UNITS, key=len, reverse=True):
            if text.endswith(unit):
                try:
                    return timedelta(seconds=float(text[: -len(unit)]) * _DURATION_UNITS[unit])
                except ValueError:
                    break
        else:
            try:
                return timedelta(seconds=float(text))
            except ValueError:
                pass
    raise ModelError(f"bad duration {raw!r}")
