"""Generalized Benders decomposition with big-M subproblems."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from ..grid.compact import CompactAreaProblem, CouplingSet
from ..parametric.penalty import PenalizedAreaProblem, bigM_reformulate
from ..qp import QpProblem, SolveStatus, solve_lp, solve_qp
from ..utils.config import Tolerances
from ..utils.exceptions import CoordinationError, PenaltyConfigurationError
from ..utils.logger import get_logger
from .base import CoordinationMethod, MethodResult, method_registry
from .settings import BendersConfig
from .trace import ConvergenceTrace, TraceRecord

if TYPE_CHECKING:
    from .settings import MethodSettings

logger = get_logger(__name__)


@dataclass
class OptimalityCut:
    """ηᵢ ≥ value + gradientᵀ(θ − theta)."""

    area: int
    theta: np.ndarray
    value: float
    gradient: np.ndarray

    def at(self, theta: np.ndarray) -> float:
        return self.value + float(self.gradient @ (theta - self.theta))


@dataclass
class Subproblem:
    """A penalized area problem and the local solution of its latest solve."""

    problem: PenalizedAreaProblem
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def cut(self, theta: np.ndarray, tolerances: Tolerances | None) -> OptimalityCut:
        """
        Value and θ-gradient −Cᵀλ − Fᵀν of the subproblem at θ, from its duals.
        """
        solution = solve_qp(self.problem.at(theta), tolerances)
        if solution.status is not SolveStatus.OPTIMAL:
            raise PenaltyConfigurationError(
                self.problem.index, f"Benders subproblem ended {solution.status.value}"
            )
        self.x = self.problem.local(solution.primal)
        gradient = -(
            self.problem.ineq_coupling.T @ solution.ineq_duals
            + self.problem.eq_coupling.T @ solution.eq_duals
        )
        return OptimalityCut(
            area=self.problem.index,
            theta=np.array(theta, dtype=float),
            value=float(solution.objective),
            gradient=gradient,
        )


def solve_master(
    cuts: Sequence[OptimalityCut],
    n_areas: int,
    coupling: CouplingSet,
    bound: float,
    tolerances: Tolerances | None = None,
) -> tuple[np.ndarray, float]:
    """
    minimize Σᵢηᵢ over (θ, η) subject to the cuts, Dθ ≤ r and |θ| ≤ bound.

    Raises:
        CoordinationError: If the master is infeasible or unbounded
    """
    d = coupling.dimension
    rows = []
    rhs = []
    for cut in cuts:
        row = np.zeros(d + n_areas)
        row[:d] = cut.gradient
        row[d + cut.area] = -1.0
        rows.append(row)
        rhs.append(float(cut.gradient @ cut.theta) - cut.value)
    box = np.hstack([np.vstack([np.eye(d), -np.eye(d)]), np.zeros((2 * d, n_areas))])
    ineq = np.vstack(
        [np.array(rows).reshape(len(rows), d + n_areas), box]
        + [np.hstack([coupling.matrix, np.zeros((coupling.n_rows, n_areas))])]
    )
    ineq_rhs = np.concatenate([np.array(rhs), np.full(2 * d, bound), coupling.rhs])
    cost = np.concatenate([np.zeros(d), np.ones(n_areas)])
    solution = solve_lp(QpProblem.linear(cost, ineq_matrix=ineq, ineq_rhs=ineq_rhs), tolerances)
    if not solution.optimal:
        raise CoordinationError(f"Benders master ended {solution.status.value}")
    return solution.primal[:d].copy(), float(solution.objective)


def run_benders(
    problems: Sequence[CompactAreaProblem | PenalizedAreaProblem],
    coupling: CouplingSet | None = None,
    config: BendersConfig | None = None,
    start: np.ndarray | None = None,
    sink: Callable[[TraceRecord], None] | None = None,
    tolerances: Tolerances | None = None,
    reference_objective: float | None = None,
) -> MethodResult:
    """
    Cutting planes on Σᵢ𝒥̄ᵢ(θ), the big-M value functions.

    Every subproblem is feasible for any θ, so only optimality cuts are
    needed. The master's minimum is a lower bound that never decreases; the
    best Σᵢ𝒥̄ᵢ seen at a master point is the upper bound, and the record
    objective. A start outside the coupling set or the box only seeds cuts.

    Args:
        problems: Area problems, hard or already penalized
        coupling: Coupling polyhedron, defaults to the areas' stacked rows
        config: Box, gap tolerance, iteration cap and slack price
        start: First subproblem point, zero by default
        sink: Receives every trace record as it is written
        tolerances: Solver tolerances
        reference_objective: Centralized optimum for relative gaps

    Returns:
        MethodResult at the best upper-bound point
    """
    config = config or BendersConfig()
    subproblems = [
        Subproblem(
            problem
            if isinstance(problem, PenalizedAreaProblem)
            else bigM_reformulate(problem, config.big_m)
        )
        for problem in problems
    ]
    if coupling is None:
        coupling = CouplingSet.from_problems([sub.problem.base for sub in subproblems])
    d = coupling.dimension
    n_areas = len(subproblems)
    trace = ConvergenceTrace("benders", reference_objective=reference_objective, sink=sink)

    theta = np.zeros(d) if start is None else np.asarray(start, dtype=float).copy()
    cuts: list[OptimalityCut] = []
    lower = -np.inf
    upper = np.inf
    best_theta = theta.copy()
    best_local: list[np.ndarray] = []
    converged = False
    admissible = coupling.contains(theta) and bool(np.all(np.abs(theta) <= config.theta_bound))

    for iteration in range(config.max_iterations):
        new_cuts = [sub.cut(theta, tolerances) for sub in subproblems]
        cuts.extend(new_cuts)
        value = sum(cut.value for cut in new_cuts)
        if admissible and value < upper:
            upper = value
            best_theta = theta.copy()
            best_local = [sub.x.copy() for sub in subproblems]

        theta, master = solve_master(cuts, n_areas, coupling, config.theta_bound, tolerances)
        lower = max(lower, master)
        admissible = True
        if np.isfinite(upper):
            trace.add(
                upper,
                best_theta,
                obj_true=upper,
                lower_bound=lower,
                upper_bound=upper,
                gap=upper - lower,
                cuts=len(cuts),
            )
            if upper - lower <= config.gap_tol * max(1.0, abs(upper)):
                converged = True
                break
        logger.debug(f"Benders iteration {iteration}: bounds [{lower:.6f}, {upper:.6f}]")

    if not np.isfinite(upper):
        # The cap was hit before any admissible point; evaluate the last master point
        best_theta = theta.copy()
        upper = sum(sub.cut(theta, tolerances).value for sub in subproblems)
        best_local = [sub.x.copy() for sub in subproblems]
    objective = sum(
        sub.problem.base.true_objective(x) for sub, x in zip(subproblems, best_local)
    )
    reason = "converged" if converged else "iteration cap"
    trace.finish(
        upper,
        best_theta,
        reason,
        converged,
        obj_true=objective,
        lower_bound=lower,
        upper_bound=upper,
        gap=upper - lower,
    )
    log = logger.info if converged else logger.warning
    log(f"Benders {reason}: bounds [{lower:.6f}, {upper:.6f}] with {len(cuts)} cuts")
    return MethodResult(
        method="benders",
        theta=best_theta,
        objective=objective,
        local=best_local,
        trace=trace,
        certified=converged,
        message=reason,
        details={"lower_bound": lower, "upper_bound": upper, "cuts": len(cuts)},
    )


class BendersMethod(CoordinationMethod):
    """Generalized Benders decomposition over the boundary angles."""

    name = "benders"
    description = "Master over θ with optimality cuts from big-M subproblems"

    def run(
        self,
        problems: Sequence[CompactAreaProblem],
        start: np.ndarray,
        settings: "MethodSettings",
        sink: Callable[[TraceRecord], None] | None = None,
    ) -> MethodResult:
        return run_benders(
            problems,
            config=settings.benders,
            start=start,
            sink=sink,
            reference_objective=settings.reference_objective,
            tolerances=settings.tolerances,
        )


method_registry.register(BendersMethod())
