"""Utility modules for mopf."""

from .config import Tolerances, config
from .exceptions import (
    CaseError,
    CaseParseError,
    CaseValidationError,
    CoordinationError,
    MethodError,
    MopfError,
    ParametricError,
    SolverError,
)
from .logger import get_logger

__all__ = [
    "config",
    "Tolerances",
    "get_logger",
    "MopfError",
    "CaseError",
    "CaseParseError",
    "CaseValidationError",
    "SolverError",
    "ParametricError",
    "CoordinationError",
    "MethodError",
]
