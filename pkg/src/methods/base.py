"""Common interface, result type and registry of the coordination methods."""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from ..grid import CompactAreaProblem
from .trace import ConvergenceTrace, TraceRecord

if TYPE_CHECKING:
    from .settings import MethodSettings

# The tolerance summaries report iterations_to for
SUMMARY_GAP = 1e-3


@dataclass
class MethodResult:
    """Final boundary angles, local solutions and the trace of one run."""

    method: str
    theta: np.ndarray
    objective: float
    local: list[np.ndarray]
    trace: ConvergenceTrace
    certified: bool
    message: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    def summary(self, tol: float = SUMMARY_GAP) -> dict[str, Any]:
        return summarize_trace(self.trace, tol)


def summarize_trace(trace: ConvergenceTrace, tol: float = SUMMARY_GAP) -> dict[str, Any]:
    """Summary entry of one method, computed from its trace alone."""
    gap = trace.relative_gap(trace.final_objective)
    last = trace.records[-1] if trace.records else None
    return {
        "final_obj": trace.final_objective,
        "rel_gap_vs_centralized": None if math.isnan(gap) else gap,
        f"iterations_to_{tol:g}": trace.iterations_to(tol),
        "iterations": trace.iterations,
        "rotations": last.rotations if last is not None else 0,
        "coordinate_switches": trace.coordinate_switches(),
        "first_feasible_iteration": trace.first_feasible_iteration(),
        "certified": trace.certified,
        "termination": trace.termination,
    }


class CoordinationMethod(ABC):
    """A way of agreeing on the boundary angles."""

    name: str
    description: str

    @abstractmethod
    def run(
        self,
        problems: Sequence[CompactAreaProblem],
        start: np.ndarray,
        settings: "MethodSettings",
        sink: Callable[[TraceRecord], None] | None = None,
    ) -> MethodResult:
        """Run on the compact problems from `start` and return the result."""
        pass


@dataclass
class MethodRegistry:
    """Registry of the available methods."""

    _methods: dict[str, CoordinationMethod] = field(default_factory=dict)

    def register(self, method: CoordinationMethod) -> None:
        self._methods[method.name] = method

    def get(self, name: str) -> CoordinationMethod | None:
        return self._methods.get(name)

    def list_methods(self) -> list[str]:
        return list(self._methods.keys())

    def __contains__(self, name: str) -> bool:
        return name in self._methods

    def __len__(self) -> int:
        return len(self._methods)


# Global method registry instance
method_registry = MethodRegistry()
