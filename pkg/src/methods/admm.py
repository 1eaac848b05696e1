"""Consensus ADMM on local copies of the boundary angles."""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import block_diag

from ..grid.compact import CompactAreaProblem, CouplingSet
from ..parametric.penalty import PenalizedAreaProblem, bigM_reformulate
from ..qp import QpProblem, solve_qp
from ..utils.config import Tolerances
from ..utils.exceptions import CoordinationError
from ..utils.logger import get_logger
from .base import CoordinationMethod, MethodResult, method_registry
from .settings import AdmmConfig
from .trace import ConvergenceTrace, TraceRecord

if TYPE_CHECKING:
    from .settings import MethodSettings

logger = get_logger(__name__)


@dataclass
class AdmmAgent:
    """
    One area with its copy yᵢ of the θ entries it touches.

    `support` lists the global coordinates behind yᵢ: those the area owns or
    that appear in its local or coupling rows.
    """

    problem: CompactAreaProblem
    support: np.ndarray
    coupling_matrix: np.ndarray
    coupling_rhs: np.ndarray
    copy: np.ndarray
    multiplier: np.ndarray
    x: np.ndarray
    penalized: PenalizedAreaProblem | None = None

    @classmethod
    def create(
        cls, problem: CompactAreaProblem, coupling: CouplingSet, start: np.ndarray
    ) -> "AdmmAgent":
        rows = coupling.rows_of(problem.index)
        columns = np.vstack(
            [problem.ineq_coupling, problem.eq_coupling, coupling.matrix[rows]]
        )
        touched = np.flatnonzero(np.any(np.abs(columns) > 0.0, axis=0))
        support = np.union1d(touched, problem.owned).astype(int)
        return cls(
            problem=problem,
            support=support,
            coupling_matrix=coupling.matrix[rows][:, support],
            coupling_rhs=coupling.rhs[rows],
            copy=start[support].copy(),
            multiplier=np.zeros(support.size),
            x=np.zeros(problem.n_vars),
        )

    def local_problem(self, consensus: np.ndarray, rho: float) -> QpProblem:
        """
        minimize ½xᵀHx + fᵀx + λᵀ(y − z_S) + ρ/2‖y − z_S‖² over (x, y)
        subject to the area's rows with θ_S replaced by y.
        """
        p = self.problem
        k = self.support.size
        target = consensus[self.support]
        return QpProblem(
            hessian=block_diag(p.hessian, rho * np.eye(k)),
            linear_cost=np.concatenate([p.linear_cost, self.multiplier - rho * target]),
            ineq_matrix=np.vstack(
                [
                    np.hstack([p.ineq_matrix, -p.ineq_coupling[:, self.support]]),
                    np.hstack([np.zeros((self.coupling_rhs.size, p.n_vars)), self.coupling_matrix]),
                ]
            ),
            ineq_rhs=np.concatenate([p.ineq_rhs, self.coupling_rhs]),
            eq_matrix=np.hstack([p.eq_matrix, -p.eq_coupling[:, self.support]]),
            eq_rhs=p.eq_rhs,
        )

    def update(self, consensus: np.ndarray, rho: float, tolerances: Tolerances | None) -> None:
        solution = solve_qp(self.local_problem(consensus, rho), tolerances)
        if not solution.optimal:
            raise CoordinationError(
                f"ADMM local problem of area {self.problem.index} ended {solution.status.value}"
            )
        n = self.problem.n_vars
        self.x = solution.primal[:n]
        self.copy = solution.primal[n:]

    @property
    def cost(self) -> float:
        return self.problem.true_objective(self.x)

    def consensus_cost(
        self, theta: np.ndarray, tolerances: Tolerances | None
    ) -> tuple[float, bool]:
        """
        True local optimum with θ fixed to the averaged iterate.

        When θ is infeasible for the area the big-M form prices it instead,
        and the flag comes back False.
        """
        solution = solve_qp(self.problem.at(theta), tolerances)
        if solution.optimal:
            return self.problem.true_objective(solution.primal), True
        if self.penalized is None:
            self.penalized = bigM_reformulate(self.problem)
        qp = self.penalized.at(theta)
        solution = solve_qp(qp, tolerances)
        if not solution.optimal:
            raise CoordinationError(
                f"area {self.problem.index} has no big-M optimum at the averaged angles "
                f"({solution.status.value})"
            )
        return qp.objective(solution.primal), False


def average(
    agents: Sequence[AdmmAgent], dimension: int, rho: float, fallback: np.ndarray
) -> np.ndarray:
    """z_p = mean over areas touching p of yᵢ,p + λᵢ,p/ρ; untouched entries keep `fallback`."""
    total = np.zeros(dimension)
    count = np.zeros(dimension)
    for agent in agents:
        np.add.at(total, agent.support, agent.copy + agent.multiplier / rho)
        np.add.at(count, agent.support, 1.0)
    consensus = fallback.copy()
    touched = count > 0
    consensus[touched] = total[touched] / count[touched]
    return consensus


def consensus_cost(
    agents: Sequence[AdmmAgent],
    theta: np.ndarray,
    tolerances: Tolerances | None = None,
    executor: ThreadPoolExecutor | None = None,
) -> tuple[float, bool]:
    """Sum of the areas' local optima at θ, and whether θ is feasible for every area."""
    if executor is None:
        costs = [agent.consensus_cost(theta, tolerances) for agent in agents]
    else:
        costs = list(executor.map(lambda agent: agent.consensus_cost(theta, tolerances), agents))
    return sum(value for value, _ in costs), all(feasible for _, feasible in costs)


def run_admm(
    problems: Sequence[CompactAreaProblem],
    coupling: CouplingSet | None = None,
    config: AdmmConfig | None = None,
    start: np.ndarray | None = None,
    sink: Callable[[TraceRecord], None] | None = None,
    tolerances: Tolerances | None = None,
    reference_objective: float | None = None,
    threads: int = 1,
) -> MethodResult:
    """
    Consensus ADMM: local solves on the copies, averaging, then dual ascent
    λᵢ ← λᵢ + ρ(yᵢ − z_S).

    Stops when the copy mismatch and the change of z (times ρ) both fall
    below their tolerances, or at the iteration cap.

    Args:
        problems: Hard area problems
        coupling: Coupling polyhedron, defaults to the areas' stacked rows
        config: ρ, tolerances and iteration cap
        start: Initial consensus, zero by default
        sink: Receives every trace record as it is written
        tolerances: Solver tolerances
        reference_objective: Centralized optimum for relative gaps
        threads: Workers for the local solves

    Returns:
        MethodResult whose records carry the true objective at the averaged angles
    """
    config = config or AdmmConfig()
    hard = [getattr(problem, "base", problem) for problem in problems]
    if coupling is None:
        coupling = CouplingSet.from_problems(hard)
    d = coupling.dimension
    rho = config.rho
    consensus = np.zeros(d) if start is None else np.asarray(start, dtype=float).copy()
    agents = [AdmmAgent.create(problem, coupling, consensus) for problem in hard]
    trace = ConvergenceTrace("admm", reference_objective=reference_objective, sink=sink)

    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    converged = False
    primal = dual = float("inf")
    try:
        for _ in range(config.max_iterations):
            if executor is None:
                for agent in agents:
                    agent.update(consensus, rho, tolerances)
            else:
                list(executor.map(lambda agent: agent.update(consensus, rho, tolerances), agents))

            previous = consensus
            consensus = average(agents, d, rho, previous)
            mismatch = [agent.copy - consensus[agent.support] for agent in agents]
            for agent, gap in zip(agents, mismatch):
                agent.multiplier = agent.multiplier + rho * gap
            primal = float(np.sqrt(sum(float(gap @ gap) for gap in mismatch)))
            change = consensus - previous
            dual = rho * float(np.sqrt(sum(np.sum(change[agent.support] ** 2) for agent in agents)))
            cost, feasible = consensus_cost(agents, consensus, tolerances, executor)
            trace.add(
                cost,
                consensus,
                obj_true=cost if feasible else None,
                local_cost=sum(agent.cost for agent in agents),
                consensus_feasible=feasible,
                infeas_norm=primal,
                dual_residual=dual,
                rho=rho,
            )
            if primal <= config.primal_tol and dual <= config.dual_tol:
                converged = True
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    reason = "converged" if converged else "iteration cap"
    cost, feasible = consensus_cost(agents, consensus, tolerances)
    trace.finish(
        cost,
        consensus,
        reason,
        converged,
        obj_true=cost if feasible else None,
        infeas_norm=primal,
        dual_residual=dual,
        consensus_feasible=feasible,
    )
    if converged:
        logger.info(f"ADMM converged after {trace.count('iterate')} iterations ({cost:.6f})")
    else:
        logger.warning(f"ADMM hit the iteration cap (primal {primal:.2e}, dual {dual:.2e})")
    return MethodResult(
        method="admm",
        theta=consensus,
        objective=cost,
        local=[agent.x for agent in agents],
        trace=trace,
        certified=converged,
        message=reason,
        details={"rho": rho, "primal_residual": primal, "dual_residual": dual},
    )


class AdmmMethod(CoordinationMethod):
    """Consensus ADMM over duplicated boundary angles."""

    name = "admm"
    description = "Consensus ADMM with local copies of the boundary angles"

    def run(
        self,
        problems: Sequence[CompactAreaProblem],
        start: np.ndarray,
        settings: "MethodSettings",
        sink: Callable[[TraceRecord], None] | None = None,
    ) -> MethodResult:
        return run_admm(
            problems,
            config=settings.admm,
            start=start,
            sink=sink,
            reference_objective=settings.reference_objective,
            tolerances=settings.tolerances,
            threads=settings.algo.threads,
        )


method_registry.register(AdmmMethod())
