"""Command line entry point (``foilex``).

Exit codes: 0 success, 1 validation failure, 2 pipeline failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import topsis
from .engine import VALIDATION_FAILURES, ConfigError, Engine, ExplanationOutcome, load_config
from .fixtures import resolve_scenario_path
from .model import ExplanationRequest, ModelError, format_ts, parse_ts
from .scenario import ScenarioInvalid, ScenarioParseError, load_scenario, read_file, validate_document

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PIPELINE = 2


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=False))


def _fmt_row(values) -> str:
    return "  ".join(f"{v:>9.3f}" for v in values)


def format_outcome(outcome: ExplanationOutcome, trace: bool) -> str:
    if outcome.failure is not None:
        return f"no explanation ({outcome.failure.reason}): {outcome.failure.message}"
    ex = outcome.explanation
    assert ex is not None
    lines = [ex.text]
    if trace:
        lines.append(f"  case: {ex.case.value}")
        lines.append(f"  fact: {json.dumps(ex.fact.to_json())}")
        lines.append(f"  foil: {ex.foil_rule.name} ({ex.foil_rule.id})")
        if ex.polished:
            lines.append(f"  pattern: {ex.pattern_fill}")
        if ex.matrix is not None and ex.ranking is not None:
            width = max(len(c) for c in ex.matrix.candidates)
            lines.append("  " + " " * width + "  " + "  ".join(f"{c[:9]:>9}" for c in ex.matrix.criteria))
            for i, cand in enumerate(ex.matrix.candidates):
                lines.append(f"  {cand:<{width}}  {_fmt_row(ex.matrix.values[i])}")
            lines.append("  " + " " * width + "  " + "  ".join(f"{h:>9}" for h in ("d_best", "d_worst", "closeness")))
            r = ex.ranking
            for i, cand in enumerate(ex.matrix.candidates):
                mark = " *" if i == r.winner else ""
                lines.append(f"  {cand:<{width}}  {_fmt_row((r.d_best[i], r.d_worst[i], r.closeness[i]))}{mark}")
    return "\n".join(lines)


def _exit_code(outcomes: Sequence[ExplanationOutcome]) -> int:
    code = EXIT_OK
    for o in outcomes:
        if o.failure is None:
            continue
        if o.failure.reason in VALIDATION_FAILURES:
            return EXIT_INVALID
        code = EXIT_PIPELINE
    return code


def _load(args):
    scenario = load_scenario(resolve_scenario_path(args.scenario))
    config = load_config(args.config)
    return Engine(scenario, config)


def cmd_explain(args) -> int:
    engine = _load(args)
    requests = engine.scenario.requests
    base = requests[0] if requests else None
    user = args.user or (base.user if base else None)
    device = args.device or (base.device if base else None)
    at = parse_ts(args.at) if args.at else (base.at if base else None)
    if user is None or device is None or at is None:
        print("error: the scenario has no request; pass --user, --device and --at", file=sys.stderr)
        return EXIT_INVALID
    fact_rule = args.fact_rule or (base.fact_rule if base and not (args.user or args.device) else None)
    outcome = engine.explain(ExplanationRequest(user, device, at, fact_rule))
    if args.format == "json":
        _print_json(outcome.to_json(trace=args.trace))
    else:
        print(format_outcome(outcome, args.trace))
    return _exit_code([outcome])


def cmd_replay(args) -> int:
    engine = _load(args)
    outcomes = engine.replay()
    if args.format == "json":
        _print_json([o.to_json(trace=args.trace) for o in outcomes])
    else:
        for o in outcomes:
            r = o.request
            print(f"[{r.user} / {r.device} @ {format_ts(r.at)}]")
            print(format_outcome(o, args.trace))
    return _exit_code(outcomes)


def cmd_validate(args) -> int:
    violations = validate_document(read_file(resolve_scenario_path(args.scenario)))
    if args.format == "json":
        _print_json({"ok": not violations, "violations": violations})
    elif violations:
        for v in violations:
            print(v)
    else:
        print("ok")
    return EXIT_INVALID if violations else EXIT_OK


def _read_matrix(path: str):
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except ValueError:
        rows = [line.replace(",", " ").split() for line in text.splitlines() if line.strip()]
        return [[float(v) for v in row] for row in rows], None, None
    if isinstance(data, dict):
        return data["matrix"], data.get("labels"), data.get("weights")
    return data, None, None


def cmd_rank(args) -> int:
    try:
        matrix, labels, weights = _read_matrix(args.matrix)
        if args.weights:
            weights = [float(w) for w in args.weights.split(",")]
        result = topsis.rank(matrix, weights, labels)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.format == "json":
        _print_json(result.to_json())
        return EXIT_OK
    names = list(labels) if labels else [f"#{i}" for i in range(len(result.closeness))]
    width = max(len(n) for n in names)
    print(" " * width + "  " + "  ".join(f"{h:>9}" for h in ("d_best", "d_worst", "closeness")))
    for i, name in enumerate(names):
        mark = " *" if i == result.winner else ""
        print(f"{name:<{width}}  {_fmt_row((result.d_best[i], result.d_worst[i], result.closeness[i]))}{mark}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import make_server

    engine = _load(args)
    server = make_server(engine, args.host, args.port)
    print(f"serving on http://{args.host}:{server.server_address[1]}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foilex", description="Contrastive explanations for rule-based automation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, config=True):
        p.add_argument("--scenario", required=True, help="scenario file, or a bundled fixture name (test1..test4)")
        if config:
            p.add_argument("--config", help="engine config (JSON)")
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("explain", help="explain one request")
    scenario_args(p)
    p.add_argument("--user")
    p.add_argument("--device")
    p.add_argument("--at", help="RFC 3339 request time")
    p.add_argument("--fact-rule", help="treat this rule's latest firing as the fact")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("replay", help="run every request embedded in a scenario")
    scenario_args(p)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("validate", help="check a scenario file")
    scenario_args(p, config=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("rank", help="run TOPSIS on a decision matrix file")
    p.add_argument("--matrix", required=True, help="JSON list of rows, {matrix, labels, weights}, or CSV")
    p.add_argument("--weights", help="comma separated weights, must sum to 1")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("serve", help="serve the HTTP API")
    scenario_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"error: cannot parse scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioInvalid as exc:
        print("error: invalid scenario:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
