"""End-to-end pipeline: fact -> case -> candidates -> scores -> TOPSIS -> explanation."""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import timedelta
from pathlib import Path
from typing import Any, Mapping

from .explainer import Explanation, RephraseConfig, RenderError, polish, render
from .facts import ConfusingCase, ErrorFact, FiredFact, IntegrityError, classify, determine_fact
from .history import EventLog, TimeWindow
from .model import ExplanationDelivered, ExplanationRequest, ModelError, SystemEvent, format_ts, parse_duration
from .scenario import Scenario
from .scoring import CRITERIA, NoCandidateError, build_matrix, candidate_rules
from .topsis import ContractError, rank

log = logging.getLogger(__name__)

ENV_PREFIX = "FOILEX_"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    recency_window: timedelta = timedelta(minutes=60)
    counting_window: timedelta = timedelta(days=30)
    # criterion name -> weight; renormalized over the criteria a case uses
    weights: Mapping[str, float] | None = None
    occurrence_scope: str = "per-user"
    rephrase: RephraseConfig = field(default_factory=RephraseConfig)
    log_path: Path | None = None

    def __post_init__(self) -> None:
        if self.recency_window <= timedelta(0) or self.counting_window <= timedelta(0):
            raise ConfigError("windows must be positive durations")
        if self.occurrence_scope not in ("per-user", "global"):
            raise ConfigError(f"occurrence_scope must be 'per-user' or 'global', not {self.occurrence_scope!r}")
        if self.weights is not None:
            known = set(CRITERIA[ConfusingCase.CC1])
            for name, w in self.weights.items():
                if name not in known:
                    raise ConfigError(f"unknown criterion {name!r} in weights")
                if not isinstance(w, (int, float)) or isinstance(w, bool) or not w >= 0:
                    raise ConfigError(f"weight for {name!r} must be a non-negative number")

    def weights_for(self, criteria: tuple[str, ...]) -> list[float] | None:
        if self.weights is None:
            return None
        raw = [float(self.weights.get(c, 0.0)) for c in criteria]
        total = sum(raw)
        if total <= 0:
            raise ConfigError(f"weights give zero total for criteria {criteria}")
        return [w / total for w in raw]

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "EngineConfig":
        try:
            kwargs: dict[str, Any] = {}
            if "recency_window" in data:
                kwargs["recency_window"] = parse_duration(data["recency_window"])
            if "counting_window" in data:
                kwargs["counting_window"] = parse_duration(data["counting_window"])
            if data.get("weights") is not None:
                if not isinstance(data["weights"], Mapping):
                    raise ConfigError("weights must map criterion names to numbers")
                kwargs["weights"] = dict(data["weights"])
            if "occurrence_scope" in data:
                kwargs["occurrence_scope"] = data["occurrence_scope"]
            if data.get("log_path"):
                kwargs["log_path"] = Path(data["log_path"])
            kwargs["rephrase"] = RephraseConfig(
                endpoint=data.get("rephrase_endpoint") or None,
                token=data.get("rephrase_token") or None,
                timeout=float(data.get("rephrase_timeout", 5.0)),
            )
        except ModelError as exc:
            raise ConfigError(str(exc)) from None
        return cls(**kwargs)

    def with_env(self, env: Mapping[str, str] | None = None) -> "EngineConfig":
        """Apply ``FOILEX_REPHRASE_ENDPOINT`` / ``FOILEX_REPHRASE_TOKEN`` / ``FOILEX_LOG_PATH``."""
        env = os.environ if env is None else env
        rephrase = self.rephrase
        if env.get(ENV_PREFIX + "REPHRASE_ENDPOINT"):
            rephrase = replace(rephrase, endpoint=env[ENV_PREFIX + "REPHRASE_ENDPOINT"])
        if env.get(ENV_PREFIX + "REPHRASE_TOKEN"):
            rephrase = replace(rephrase, token=env[ENV_PREFIX + "REPHRASE_TOKEN"])
        log_path = Path(env[ENV_PREFIX + "LOG_PATH"]) if env.get(ENV_PREFIX + "LOG_PATH") else self.log_path
        return replace(self, rephrase=rephrase, log_path=log_path)


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> EngineConfig:
    if path is None:
        return EngineConfig().with_env(env)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return EngineConfig.from_mapping(data).with_env(env)


# failure reasons
UNKNOWN_USER = "unknown-user"
UNKNOWN_DEVICE = "unknown-device"
INTEGRITY = "integrity-error"
NO_CANDIDATE = "no-candidate"
VALIDATION_FAILURES = frozenset({UNKNOWN_USER, UNKNOWN_DEVICE})


@dataclass(frozen=True)
class Failure:
    reason: str
    message: str


@dataclass(frozen=True)
class ExplanationOutcome:
    request: ExplanationRequest
    explanation: Explanation | None = None
    failure: Failure | None = None
    audit: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.explanation is None) == (self.failure is None):
            raise ValueError("exactly one of explanation/failure must be set")

    @property
    def ok(self) -> bool:
        return self.explanation is not None

    def to_json(self, trace: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {"request": self.request.to_json(), "ok": self.ok}
        if self.explanation is not None:
            out["explanation"] = self.explanation.to_json()
            if not trace:
                out["explanation"].pop("trace", None)
        else:
            assert self.failure is not None
            out["failure"] = {"reason": self.failure.reason, "message": self.failure.message}
        if trace:
            out["audit"] = dict(self.audit)
        return out


class Engine:
    """Explanation service over one scenario.

    Computations run on log snapshots; only the final "explanation delivered"
    append is serialized.
    """

    def __init__(self, scenario: Scenario, config: EngineConfig | None = None) -> None:
        self.scenario = scenario
        self.config = config or EngineConfig()
        self._append_lock = threading.Lock()
        if self.config.log_path is not None:
            path = self.config.log_path
            if not path.exists() or path.stat().st_size == 0:
                path.parent.mkdir(parents=True, exist_ok=True)
                scenario.log.dump(path)
            self.log = EventLog.open(path)
        else:
            self.log = scenario.log.copy()

    def explain(self, req: ExplanationRequest) -> ExplanationOutcome:
        sc = self.scenario
        audit: dict[str, Any] = {"request": req.to_json()}
        if req.user not in sc.users:
            return self._fail(req, audit, UNKNOWN_USER, f"user {req.user!r} is not registered")
        if req.device not in sc.devices:
            return self._fail(req, audit, UNKNOWN_DEVICE, f"device {req.device!r} is not registered")

        snapshot = self.log.copy()
        try:
            fact = determine_fact(snapshot, sc.rules, req, self.config.recency_window)
        except IntegrityError as exc:
            return self._fail(req, audit, INTEGRITY, str(exc))
        case = classify(fact)
        audit["fact"] = fact.to_json()
        audit["case"] = case.value

        matrix = ranking = None
        if case is ConfusingCase.CC3:
            assert isinstance(fact, ErrorFact)
            foil_id = snapshot.last_rule_before(req.device, fact.at, sc.rules)
            if foil_id is None:
                return self._fail(req, audit, NO_CANDIDATE, "no rule acted on the device before the error")
            audit["foil_source"] = "last-rule-before-error"
        else:
            window = TimeWindow(req.at - self.config.counting_window, req.at)
            try:
                candidates = candidate_rules(sc.rules.values(), req.device, fact)
            except NoCandidateError as exc:
                return self._fail(req, audit, NO_CANDIDATE, str(exc))
            happened = fact.rule if isinstance(fact, FiredFact) else None
            matrix = build_matrix(
                candidates,
                case,
                snapshot,
                req.user,
                window,
                happened_rule=happened,
                occurrence_per_user=self.config.occurrence_scope == "per-user",
            )
            try:
                ranking = rank(matrix.values, self.config.weights_for(matrix.criteria), matrix.candidates)
            except (ContractError, ValueError) as exc:
                return self._fail(req, audit, "ranking-error", str(exc))
            foil_id = ranking.winner_label
            audit["window"] = {"start": format_ts(window.start), "end": format_ts(window.end)}
            audit["matrix"] = matrix.to_json()
            audit["ranking"] = ranking.to_json()
            audit["foil_source"] = "topsis"

        foil = sc.rules[foil_id]
        try:
            pattern = render(case, fact, foil, req.device, sc.vocab)
        except RenderError as exc:
            return self._fail(req, audit, "render-error", str(exc))
        text, polished = polish(pattern, self.config.rephrase)
        explanation = Explanation(text, case, fact, foil, pattern, polished, matrix, ranking)
        audit["foil"] = foil.id
        audit["pattern_fill"] = pattern
        audit["polished"] = polished
        self._record(req, foil.id)
        return ExplanationOutcome(req, explanation=explanation, audit=audit)

    def _record(self, req: ExplanationRequest, rule_id: str) -> None:
        with self._append_lock:
            # a request stamped before the log tail is recorded at the tail
            tail = self.log.last_timestamp
            at = req.at if tail is None or req.at >= tail else tail
            self.log.append(SystemEvent(at, ExplanationDelivered(rule_id, req.user, req.device)))

    @staticmethod
    def _fail(req: ExplanationRequest, audit: dict, reason: str, message: str) -> ExplanationOutcome:
        log.info("explanation failed (%s): %s", reason, message)
        audit["failure"] = reason
        return ExplanationOutcome(req, failure=Failure(reason, message), audit=audit)

    def replay(self) -> list[ExplanationOutcome]:
        return [self.explain(req) for req in self.scenario.requests]


def explain(scenario: Scenario, req: ExplanationRequest, config: EngineConfig | None = None) -> ExplanationOutcome:
    """One-shot convenience wrapper; the delivered event lands in a fresh engine log."""
    return Engine(scenario, config).explain(req)
