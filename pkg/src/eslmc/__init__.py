"""Model checking for Epistemic Strategy Logic over epistemic concurrent game models."""

from __future__ import annotations

from .checker import Verdict, build_report, existential_closure, model_check
from .evaluator import EvalConfig, Evaluator, holds_in_model, satisfies, universal_closure
from .model import Ecgm, load_model, validate_model
from .parser import parse_formula
from .qptl import parse_qptl, qptl_oracle, qptl_sat
from .strategy import Assignment, Strategy, enumerate_strategies, strategy_count

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "Ecgm",
    "EvalConfig",
    "Evaluator",
    "Strategy",
    "Verdict",
    "build_report",
    "enumerate_strategies",
    "existential_closure",
    "holds_in_model",
    "load_model",
    "model_check",
    "parse_formula",
    "parse_qptl",
    "qptl_oracle",
    "qptl_sat",
    "satisfies",
    "strategy_count",
    "universal_closure",
    "validate_model",
]
