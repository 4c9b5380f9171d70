"""permute: an extensible DPOR-based model checker for multithreaded programs."""

__version__ = "0.1.0"

from .core import ClockVector, ModelState, Transition, VisibleObject, fingerprint
from .engine import ExplorationConfig, ExplorationReport, TraceResult, explore
from .runtime import ObjectDecl, Program, ReplayCursor, ops
from .scenario import ScenarioError, instantiate, parse_scenario, print_scenario

__all__ = [
    "ClockVector", "ExplorationConfig", "ExplorationReport", "ModelState",
    "ObjectDecl", "Program", "ReplayCursor", "ScenarioError", "TraceResult",
    "Transition", "VisibleObject", "explore", "fingerprint", "instantiate",
    "ops", "parse_scenario", "print_scenario",
]
