"""QP/LP data and solution types."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..utils.config import Tolerances
from ..utils.exceptions import ProblemValidationError


class SolveStatus(Enum):
    """Outcome of a solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _as_matrix(data: np.ndarray | None, n_cols: int) -> np.ndarray:
    if data is None:
        return np.zeros((0, n_cols))
    matrix = np.atleast_2d(np.asarray(data, dtype=float))
    if matrix.size == 0:
        return np.zeros((0, n_cols))
    return matrix


def _as_vector(data: np.ndarray | None) -> np.ndarray:
    if data is None:
        return np.zeros(0)
    return np.atleast_1d(np.asarray(data, dtype=float)).ravel()


@dataclass
class QpProblem:
    """
    minimize ½xᵀHx + fᵀx  subject to  Gx ≤ h,  Ex = e.

    Matrices are dense. Missing constraint blocks are stored as empty arrays with
    the right column count.
    """

    hessian: np.ndarray
    linear_cost: np.ndarray
    ineq_matrix: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.linear_cost = _as_vector(self.linear_cost)
        n = self.linear_cost.size
        hessian = np.asarray(self.hessian, dtype=float)
        self.hessian = hessian.reshape(n, n) if hessian.size == n * n else hessian
        self.ineq_matrix = _as_matrix(self.ineq_matrix, n)
        self.ineq_rhs = _as_vector(self.ineq_rhs)
        self.eq_matrix = _as_matrix(self.eq_matrix, n)
        self.eq_rhs = _as_vector(self.eq_rhs)

    @classmethod
    def linear(cls, cost: np.ndarray, **constraints: np.ndarray | None) -> "QpProblem":
        """Build an LP (zero Hessian)."""
        cost = _as_vector(cost)
        return cls(hessian=np.zeros((cost.size, cost.size)), linear_cost=cost, **constraints)

    @property
    def n_vars(self) -> int:
        return self.linear_cost.size

    @property
    def n_ineq(self) -> int:
        return self.ineq_rhs.size

    @property
    def n_eq(self) -> int:
        return self.eq_rhs.size

    @property
    def is_linear(self) -> bool:
        return not np.any(self.hessian)

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.hessian @ x + self.linear_cost @ x)

    def validate(self, tolerances: Tolerances) -> None:
        """
        Check shapes, symmetry and positive semidefiniteness.

        Raises:
            ProblemValidationError: If any input contract is violated
        """
        n = self.n_vars
        if self.hessian.shape != (n, n):
            raise ProblemValidationError(f"Hessian shape {self.hessian.shape} != ({n}, {n})")
        if self.ineq_matrix.shape != (self.n_ineq, n):
            raise ProblemValidationError(
                f"Inequality block {self.ineq_matrix.shape} does not match "
                f"{self.n_ineq} rows x {n} columns"
            )
        if self.eq_matrix.shape != (self.n_eq, n):
            raise ProblemValidationError(
                f"Equality block {self.eq_matrix.shape} does not match "
                f"{self.n_eq} rows x {n} columns"
            )
        for name, block in (
            ("hessian", self.hessian),
            ("linear_cost", self.linear_cost),
            ("ineq_matrix", self.ineq_matrix),
            ("ineq_rhs", self.ineq_rhs),
            ("eq_matrix", self.eq_matrix),
            ("eq_rhs", self.eq_rhs),
        ):
            if not np.all(np.isfinite(block)):
                raise ProblemValidationError(f"Non-finite entries in {name}")

        if n == 0 or self.is_linear:
            return
        scale = max(1.0, float(np.max(np.abs(self.hessian))))
        if np.max(np.abs(self.hessian - self.hessian.T)) > tolerances.psd * scale:
            raise ProblemValidationError("Hessian is not symmetric")
        smallest = float(np.linalg.eigvalsh(0.5 * (self.hessian + self.hessian.T))[0])
        if smallest < -tolerances.psd * scale:
            raise ProblemValidationError(
                f"Hessian is not positive semidefinite (smallest eigenvalue {smallest:.3e})"
            )


@dataclass
class QpSolution:
    """Result of an LP/QP solve."""

    status: SolveStatus
    primal: np.ndarray
    objective: float = float("nan")
    ineq_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eq_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    active_set: tuple[int, ...] = ()
    inactive_set: tuple[int, ...] = ()
    working_set: tuple[int, ...] = ()
    degenerate: bool = False
    certificate: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL
