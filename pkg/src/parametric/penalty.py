"""Big-M penalized area problems and the equivalence diagnostic."""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

from ..grid.compact import CompactAreaProblem
from ..qp import QpProblem, SolveStatus, solve_qp
from ..utils.config import Tolerances, config
from ..utils.exceptions import PenaltyConfigurationError
from ..utils.logger import get_logger

logger = get_logger(__name__)

BIG_M_FACTOR = 1e4


def default_big_m(area: CompactAreaProblem) -> float:
    """M = 10⁴ · (max |linear cost| + 1)."""
    return BIG_M_FACTOR * (float(np.max(np.abs(area.linear_cost), initial=0.0)) + 1.0)


@dataclass
class PenalizedAreaProblem:
    """
    An area problem whose local rows are softened by priced slacks:

        minimize ½xᵀHx + fᵀx + M·1ᵀs
        subject to  A x − S s_a ≤ b + C θ,   −s ≤ 0
                    E x − s⁺ + s⁻ = e + F θ

    The extended variable is x̄ = [x; s_a; s⁺; s⁻]. `slack_rows` lists the
    inequality rows of the base problem that own a column of s_a; the other
    inequality rows stay hard.
    """

    base: CompactAreaProblem
    big_m: float
    slack_rows: np.ndarray
    hessian: np.ndarray
    linear_cost: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    ineq_coupling: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    eq_coupling: np.ndarray
    hard_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def index(self) -> int:
        return self.base.index

    @property
    def n_local(self) -> int:
        return self.base.n_vars

    @property
    def n_slack(self) -> int:
        return self.n_vars - self.base.n_vars

    @property
    def n_vars(self) -> int:
        return self.linear_cost.size

    @property
    def theta_dim(self) -> int:
        return self.ineq_coupling.shape[1]

    @property
    def true_hessian(self) -> np.ndarray:
        hessian = np.zeros((self.n_vars, self.n_vars))
        n = self.n_local
        hessian[:n, :n] = self.base.hessian
        return hessian

    @property
    def true_linear_cost(self) -> np.ndarray:
        cost = np.zeros(self.n_vars)
        cost[: self.n_local] = self.base.linear_cost
        return cost

    def at(self, theta: np.ndarray) -> QpProblem:
        theta = np.asarray(theta, dtype=float)
        return QpProblem(
            hessian=self.hessian,
            linear_cost=self.linear_cost,
            ineq_matrix=self.ineq_matrix,
            ineq_rhs=self.ineq_rhs + self.ineq_coupling @ theta,
            eq_matrix=self.eq_matrix,
            eq_rhs=self.eq_rhs + self.eq_coupling @ theta,
        )

    def local(self, x_bar: np.ndarray) -> np.ndarray:
        return np.asarray(x_bar)[: self.n_local]

    def slacks(self, x_bar: np.ndarray) -> np.ndarray:
        return np.asarray(x_bar)[self.n_local :]

    def true_objective(self, x_bar: np.ndarray) -> float:
        return self.base.true_objective(self.local(x_bar))

    def rotated(self, rotation: np.ndarray) -> "PenalizedAreaProblem":
        """Penalized problem in the rotated parameter θ̃ = Rθ; the slack pattern is kept."""
        rotation = np.asarray(rotation, dtype=float)
        return replace(
            self,
            base=self.base.rotated(rotation),
            ineq_coupling=self.ineq_coupling @ rotation.T,
            eq_coupling=self.eq_coupling @ rotation.T,
        )


def bigM_reformulate(  # noqa: N802
    area: CompactAreaProblem,
    M: float | None = None,  # noqa: N803
    drop_redundant: bool = True,
) -> PenalizedAreaProblem:
    """
    Soften an area's local rows with slacks priced at M.

    Every equality row gets a slack pair; every inequality row gets one slack
    unless `drop_redundant` certifies it redundant. Only rows that do not
    depend on θ are candidates: a row is redundant when maximizing its left
    side over the remaining local rows, in joint (x, θ) space, cannot exceed
    its right side.

    Args:
        area: The hard area problem
        M: Slack price, defaults to `default_big_m(area)`
        drop_redundant: Skip slacks on certified redundant rows

    Returns:
        PenalizedAreaProblem
    """
    big_m = default_big_m(area) if M is None else float(M)
    if big_m <= 0:
        raise PenaltyConfigurationError(area.index, f"M must be positive, got {big_m}")

    hard = _redundant_rows(area) if drop_redundant else np.zeros(0, dtype=int)
    slack_rows = np.setdiff1d(np.arange(area.n_ineq), hard)
    n = area.n_vars
    n_a = slack_rows.size
    n_e = area.n_eq
    n_s = n_a + 2 * n_e
    d = area.theta_dim

    selector = np.zeros((area.n_ineq, n_a))
    selector[slack_rows, np.arange(n_a)] = 1.0
    ineq_matrix = np.vstack(
        [
            np.hstack([area.ineq_matrix, -selector, np.zeros((area.n_ineq, 2 * n_e))]),
            np.hstack([np.zeros((n_s, n)), -np.eye(n_s)]),
        ]
    )
    ineq_rhs = np.concatenate([area.ineq_rhs, np.zeros(n_s)])
    ineq_coupling = np.vstack([area.ineq_coupling, np.zeros((n_s, d))])
    eq_matrix = np.hstack(
        [area.eq_matrix, np.zeros((n_e, n_a)), -np.eye(n_e), np.eye(n_e)]
    )

    hessian = np.zeros((n + n_s, n + n_s))
    hessian[:n, :n] = area.hessian
    linear_cost = np.concatenate([area.linear_cost, np.full(n_s, big_m)])

    if hard.size:
        logger.debug(f"Area {area.label}: {hard.size} redundant rows keep no slack")
    return PenalizedAreaProblem(
        base=area,
        big_m=big_m,
        slack_rows=slack_rows,
        hard_rows=hard,
        hessian=hessian,
        linear_cost=linear_cost,
        ineq_matrix=ineq_matrix,
        ineq_rhs=ineq_rhs,
        ineq_coupling=ineq_coupling,
        eq_matrix=eq_matrix,
        eq_rhs=area.eq_rhs.copy(),
        eq_coupling=area.eq_coupling.copy(),
    )


def _redundant_rows(area: CompactAreaProblem, tol: float = 1e-9) -> np.ndarray:
    """θ-independent inequality rows implied by the other local rows."""
    candidates = [
        k
        for k in range(area.n_ineq)
        if not np.any(area.ineq_coupling[k]) and np.any(area.ineq_matrix[k])
    ]
    if not candidates:
        return np.zeros(0, dtype=int)

    # Joint variables (x, θ): A x − C θ ≤ b,  E x − F θ = e
    joint_ineq = np.hstack([area.ineq_matrix, -area.ineq_coupling])
    joint_eq = np.hstack([area.eq_matrix, -area.eq_coupling])

    def minimize(objective: np.ndarray, rows: np.ndarray):
        return linprog(
            objective,
            A_ub=joint_ineq[rows] if rows.any() else None,
            b_ub=area.ineq_rhs[rows] if rows.any() else None,
            A_eq=joint_eq if area.n_eq else None,
            b_eq=area.eq_rhs if area.n_eq else None,
            bounds=(None, None),
            method="highs",
        )

    everything = np.ones(area.n_ineq, dtype=bool)
    if minimize(np.zeros(joint_ineq.shape[1]), everything).status == 2:
        logger.warning(f"Area {area.label}: local rows are jointly infeasible, keeping every slack")
        return np.zeros(0, dtype=int)

    kept = np.ones(area.n_ineq, dtype=bool)
    redundant = []
    for k in candidates:
        # only rows that keep their slack may certify another
        others = kept.copy()
        others[k] = False
        objective = np.concatenate([-area.ineq_matrix[k], np.zeros(area.theta_dim)])
        result = minimize(objective, others)
        if result.status == 0 and -result.fun <= area.ineq_rhs[k] + tol * (
            1.0 + abs(area.ineq_rhs[k])
        ):
            redundant.append(k)
            kept[k] = False
    return np.array(redundant, dtype=int)


@dataclass
class BigMReport:
    """Outcome of comparing an area problem with its big-M form at one θ."""

    feasible_theta: bool
    equivalent: bool
    big_m: float
    max_slack: float = float("nan")
    objective_gap: float = float("nan")
    primal_gap: float = float("nan")
    max_multiplier: float = float("nan")
    hard_objective: float = float("nan")
    penalized_objective: float = float("nan")
    message: str = ""

    @property
    def m_too_small(self) -> bool:
        return self.feasible_theta and not self.equivalent and self.max_multiplier >= self.big_m

    def to_dict(self) -> dict:
        return {
            "feasible_theta": self.feasible_theta,
            "equivalent": self.equivalent,
            "big_m": self.big_m,
            "max_slack": self.max_slack,
            "objective_gap": self.objective_gap,
            "primal_gap": self.primal_gap,
            "max_multiplier": self.max_multiplier,
            "hard_objective": self.hard_objective,
            "penalized_objective": self.penalized_objective,
            "message": self.message,
        }


def verify_bigM_equivalence(  # noqa: N802
    area: CompactAreaProblem | PenalizedAreaProblem,
    M: float | None = None,  # noqa: N803
    theta: np.ndarray | None = None,
    drop_redundant: bool = True,
    tol: float = 1e-8,
    tolerances: Tolerances | None = None,
) -> BigMReport:
    """
    Solve the hard and the big-M problem at θ and compare them.

    θ must be feasible for the hard problem; that is checked first with a
    feasibility LP and a violation is reported, not raised. The two problems
    are equivalent when every slack is zero and the objectives agree. When
    they are not, the largest hard multiplier tells whether M is too small.
    An already penalized problem is checked as is; M and `drop_redundant`
    are then ignored.

    Returns:
        BigMReport
    """
    tolerances = tolerances or config.tolerances
    theta = np.zeros(area.theta_dim) if theta is None else np.asarray(theta, dtype=float)
    if isinstance(area, PenalizedAreaProblem):
        penalized, area = area, area.base
    else:
        penalized = bigM_reformulate(area, M, drop_redundant=drop_redundant)
    report = BigMReport(feasible_theta=False, equivalent=False, big_m=penalized.big_m)

    hard_problem = area.at(theta)
    feasibility = solve_qp(
        QpProblem.linear(
            np.zeros(area.n_vars),
            ineq_matrix=hard_problem.ineq_matrix,
            ineq_rhs=hard_problem.ineq_rhs,
            eq_matrix=hard_problem.eq_matrix,
            eq_rhs=hard_problem.eq_rhs,
        ),
        tolerances,
    )
    if feasibility.status is SolveStatus.INFEASIBLE:
        report.message = "precondition violated: θ is infeasible for the unpenalized problem"
        return report
    report.feasible_theta = True

    hard = solve_qp(hard_problem, tolerances)
    soft = solve_qp(penalized.at(theta), tolerances)
    if not hard.optimal or not soft.optimal:
        report.message = f"hard problem {hard.status.value}, big-M problem {soft.status.value}"
        return report

    multipliers = np.concatenate([hard.ineq_duals, np.abs(hard.eq_duals)])
    report.max_multiplier = float(np.max(multipliers, initial=0.0))
    report.max_slack = float(np.max(penalized.slacks(soft.primal), initial=0.0))
    report.hard_objective = hard.objective
    report.penalized_objective = soft.objective
    report.objective_gap = abs(soft.objective - hard.objective)
    report.primal_gap = float(
        np.max(np.abs(penalized.local(soft.primal) - hard.primal), initial=0.0)
    )
    rhs_scale = 1.0 + float(
        np.max(np.abs(np.concatenate([hard_problem.ineq_rhs, hard_problem.eq_rhs])), initial=0.0)
    )
    report.equivalent = report.max_slack <= tol * rhs_scale and (
        report.objective_gap <= tol * (1.0 + abs(hard.objective))
    )

    if report.equivalent:
        report.message = "equivalent"
    elif report.max_multiplier >= penalized.big_m:
        report.message = (
            f"M too small: multiplier {report.max_multiplier:.6g} exceeds M = {penalized.big_m:.6g}"
        )
    else:
        report.message = (
            f"not equivalent (slack {report.max_slack:.3g}, gap {report.objective_gap:.3g})"
        )
    if not report.equivalent:
        logger.warning(f"Area {area.label}: {report.message}")
    return report
