"""Bundled office scenario (four test cases) shipped as package data."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .scenario import Scenario, load_document, parse_text

FIXTURE_NAMES = ("test1", "test2", "test3", "test4")


def fixture_path(name: str) -> Path:
    if name not in FIXTURE_NAMES:
        raise LookupError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")
    return Path(str(resources.files("foilex").joinpath("data", "scenarios", f"{name}.json")))


def load_fixture(name: str) -> Scenario:
    return load_document(parse_text(fixture_path(name).read_text(encoding="utf-8")))


def resolve_scenario_path(ref: str | Path) -> Path:
    """A scenario path, or the name of a bundled fixture."""
    if isinstance(ref, str) and ref in FIXTURE_NAMES and not Path(ref).exists():
        return fixture_path(ref)
    return Path(ref)
