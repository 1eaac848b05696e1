"""Rotated coordinate descent over critical regions."""

from .config import AlgoConfig
from .coordination import (
    CoordinationResult,
    adapt_sigma,
    penalized_value,
    solve_hard_coordination,
    solve_l1_coordination,
)
from .core import RcdcreMethod, RcdcreResult, rotate_problem, run
from .explorer import AreaEvaluator, ProbeEvent, area_round, bcd_explore, bundle_entry
from .rotation import build_rotation, givens, pivot_index
from .state import AreaAgentState, CoordinatorState, Direction, direction_vector, signed_basis
from .subgradient import SubgradientBundle, subgradient_direction

__all__ = [
    "AlgoConfig",
    "AreaAgentState",
    "CoordinatorState",
    "Direction",
    "signed_basis",
    "direction_vector",
    "SubgradientBundle",
    "subgradient_direction",
    "givens",
    "pivot_index",
    "build_rotation",
    "CoordinationResult",
    "penalized_value",
    "solve_l1_coordination",
    "solve_hard_coordination",
    "adapt_sigma",
    "AreaEvaluator",
    "ProbeEvent",
    "bcd_explore",
    "bundle_entry",
    "area_round",
    "rotate_problem",
    "RcdcreResult",
    "run",
    "RcdcreMethod",
]
