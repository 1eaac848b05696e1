"""All areas solved as one QP, the reference every other method is measured against."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import block_diag

from ..grid.compact import CompactAreaProblem, CouplingSet
from ..qp import QpProblem, QpSolution, SolveStatus, solve_lp, solve_qp
from ..utils.config import Tolerances
from ..utils.exceptions import CoordinationError
from ..utils.logger import get_logger
from .base import CoordinationMethod, MethodResult, method_registry
from .trace import ConvergenceTrace, TraceRecord

if TYPE_CHECKING:
    from .settings import MethodSettings

logger = get_logger(__name__)


@dataclass
class CentralizedResult:
    """Joint optimum; `objective` is nan unless the solve was optimal."""

    status: SolveStatus
    objective: float
    theta: np.ndarray
    local: list[np.ndarray]
    solution: QpSolution

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def dispatch(self, problems: Sequence[CompactAreaProblem]) -> list[np.ndarray]:
        return [problem.dispatch(x) for problem, x in zip(problems, self.local)]


def _hard(problems: Sequence) -> list[CompactAreaProblem]:
    return [getattr(problem, "base", problem) for problem in problems]


def joint_rows(
    problems: Sequence[CompactAreaProblem], coupling: CouplingSet
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Local rows of every area and the coupling rows over z = [x₁; …; x_N; θ].

    Returns:
        (inequality matrix, its rhs, equality matrix, its rhs)
    """
    d = coupling.dimension
    sizes = [problem.n_vars for problem in problems]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    n = int(offsets[-1]) + d

    ineq, ineq_rhs, eq, eq_rhs = [], [], [], []
    for problem, offset in zip(problems, offsets):
        rows = np.zeros((problem.n_ineq, n))
        rows[:, offset : offset + problem.n_vars] = problem.ineq_matrix
        rows[:, n - d :] = -problem.ineq_coupling
        ineq.append(rows)
        ineq_rhs.append(problem.ineq_rhs)
        rows = np.zeros((problem.n_eq, n))
        rows[:, offset : offset + problem.n_vars] = problem.eq_matrix
        rows[:, n - d :] = -problem.eq_coupling
        eq.append(rows)
        eq_rhs.append(problem.eq_rhs)
    rows = np.zeros((coupling.n_rows, n))
    rows[:, n - d :] = coupling.matrix
    ineq.append(rows)
    ineq_rhs.append(coupling.rhs)
    return np.vstack(ineq), np.concatenate(ineq_rhs), np.vstack(eq), np.concatenate(eq_rhs)


def _split(z: np.ndarray, problems: Sequence[CompactAreaProblem]) -> list[np.ndarray]:
    sizes = np.cumsum([problem.n_vars for problem in problems])[:-1]
    return np.split(z, sizes) if problems else []


def solve_centralized(
    problems: Sequence[CompactAreaProblem],
    coupling: CouplingSet | None = None,
    tolerances: Tolerances | None = None,
) -> CentralizedResult:
    """
    Minimize Σᵢ ½xᵢᵀHᵢxᵢ + fᵢᵀxᵢ jointly over every xᵢ and θ.

    Penalized problems are solved through their hard base. An infeasible or
    unbounded case is reported through `status`.
    """
    problems = _hard(problems)
    if coupling is None:
        coupling = CouplingSet.from_problems(problems)
    d = coupling.dimension
    ineq, ineq_rhs, eq, eq_rhs = joint_rows(problems, coupling)
    hessian = block_diag(*[problem.hessian for problem in problems], np.zeros((d, d)))
    linear = np.concatenate([problem.linear_cost for problem in problems] + [np.zeros(d)])
    solution = solve_qp(QpProblem(hessian, linear, ineq, ineq_rhs, eq, eq_rhs), tolerances)
    if not solution.optimal:
        logger.warning(f"Centralized solve ended {solution.status.value}")
        return CentralizedResult(
            status=solution.status,
            objective=float("nan"),
            theta=np.full(d, np.nan),
            local=[],
            solution=solution,
        )
    n = solution.primal.size - d
    local = _split(solution.primal[:n], problems)
    logger.info(f"Centralized objective {solution.objective:.6f}")
    return CentralizedResult(
        status=solution.status,
        objective=float(solution.objective),
        theta=solution.primal[n:].copy(),
        local=local,
        solution=solution,
    )


def find_feasible_theta(
    problems: Sequence[CompactAreaProblem],
    coupling: CouplingSet | None = None,
    start: np.ndarray | None = None,
    tolerances: Tolerances | None = None,
) -> np.ndarray:
    """
    The θ closest to `start` in ℓ1 for which every hard area problem and the
    coupling set are feasible (one LP over x, θ and |θ − start|).

    Raises:
        CoordinationError: If no such θ exists
    """
    problems = _hard(problems)
    if coupling is None:
        coupling = CouplingSet.from_problems(problems)
    d = coupling.dimension
    start = np.zeros(d) if start is None else np.asarray(start, dtype=float)
    ineq, ineq_rhs, eq, eq_rhs = joint_rows(problems, coupling)
    n = ineq.shape[1]
    theta = np.zeros((d, n))
    theta[:, n - d :] = np.eye(d)
    # |θ − start| ≤ u, written as ±(θ − start) − u ≤ 0
    ineq = np.vstack(
        [
            np.hstack([ineq, np.zeros((ineq.shape[0], d))]),
            np.hstack([theta, -np.eye(d)]),
            np.hstack([-theta, -np.eye(d)]),
        ]
    )
    ineq_rhs = np.concatenate([ineq_rhs, start, -start])
    eq = np.hstack([eq, np.zeros((eq.shape[0], d))])
    cost = np.concatenate([np.zeros(n), np.ones(d)])
    solution = solve_lp(
        QpProblem.linear(cost, ineq_matrix=ineq, ineq_rhs=ineq_rhs, eq_matrix=eq, eq_rhs=eq_rhs),
        tolerances,
    )
    if not solution.optimal:
        raise CoordinationError(
            f"no boundary vector makes every area feasible ({solution.status.value})"
        )
    feasible = solution.primal[n - d : n].copy()
    logger.debug(f"Feasible start at ℓ1 distance {solution.objective:.3e} from the requested one")
    return feasible


class CentralizedMethod(CoordinationMethod):
    """One QP over every area's variables and θ."""

    name = "centralized"
    description = "Joint QP over all areas, the reference optimum"

    def run(
        self,
        problems: Sequence[CompactAreaProblem],
        start: np.ndarray,
        settings: "MethodSettings",
        sink: Callable[[TraceRecord], None] | None = None,
    ) -> MethodResult:
        result = solve_centralized(problems, tolerances=settings.tolerances)
        reference = settings.reference_objective
        trace = ConvergenceTrace(
            self.name,
            reference_objective=result.objective if reference is None else reference,
            sink=sink,
        )
        trace.finish(
            result.objective,
            result.theta,
            result.status.value,
            result.optimal,
            obj_true=result.objective,
            stage="feasible" if result.optimal else None,
        )
        return MethodResult(
            method=self.name,
            theta=result.theta,
            objective=result.objective,
            local=result.local,
            trace=trace,
            certified=result.optimal,
            message=result.status.value,
        )


method_registry.register(CentralizedMethod())
