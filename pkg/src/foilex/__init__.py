"""Contrastive explanations for rule-based automation systems.

Given a confusing observation on a device, predict the rule the user most
likely expected (the foil) and explain the fact against it.
"""

from .engine import Engine, EngineConfig, ExplanationOutcome, explain, load_config
from .facts import ConfusingCase, classify, determine_fact
from .fixtures import load_fixture
from .model import AtomicCondition, ExplanationRequest, Rule, canonicalize, flatten_conditions
from .scenario import load_scenario, validate_scenario
from .topsis import rank

__all__ = [
    "AtomicCondition",
    "ConfusingCase",
    "Engine",
    "EngineConfig",
    "ExplanationOutcome",
    "ExplanationRequest",
    "Rule",
    "canonicalize",
    "classify",
    "determine_fact",
    "explain",
    "flatten_conditions",
    "load_config",
    "load_fixture",
    "load_scenario",
    "rank",
    "validate_scenario",
]
