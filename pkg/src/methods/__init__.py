"""Coordination methods: the centralized reference and the distributed baselines."""

from .admm import AdmmAgent, run_admm
from .base import (
    SUMMARY_GAP,
    CoordinationMethod,
    MethodRegistry,
    MethodResult,
    method_registry,
    summarize_trace,
)
from .benders import OptimalityCut, run_benders, solve_master
from .centralized import CentralizedResult, find_feasible_theta, solve_centralized
from .cre import run_cre
from .settings import AdmmConfig, BendersConfig, MethodSettings
from .trace import PHASES, ConvergenceTrace, TraceRecord

__all__ = [
    "CoordinationMethod",
    "MethodResult",
    "MethodRegistry",
    "method_registry",
    "summarize_trace",
    "SUMMARY_GAP",
    "MethodSettings",
    "AdmmConfig",
    "BendersConfig",
    "ConvergenceTrace",
    "TraceRecord",
    "PHASES",
    "CentralizedResult",
    "solve_centralized",
    "find_feasible_theta",
    "run_cre",
    "AdmmAgent",
    "run_admm",
    "OptimalityCut",
    "solve_master",
    "run_benders",
]
