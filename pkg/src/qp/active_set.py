"""Primal active-set QP/LP solver with exact active sets and multipliers."""

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from ..utils.config import Tolerances, config
from ..utils.exceptions import ProblemValidationError, SolverError
from ..utils.logger import get_logger
from .problem import QpProblem, QpSolution, SolveStatus

logger = get_logger(__name__)

HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}

# Consecutive zero-length steps before switching to lowest-index pivoting
BLAND_AFTER = 3


def solve_qp(problem: QpProblem, tolerances: Tolerances | None = None) -> QpSolution:
    """
    Solve a convex QP with the primal active-set method.

    A feasible vertex is found with HiGHS dual simplex, then the working set is
    refined until the KKT conditions hold. Infeasible problems return a Farkas
    certificate, unbounded problems a recession ray.

    Args:
        problem: QP data (Hessian may be zero or singular PSD)
        tolerances: Tolerance record, defaults to the global config

    Returns:
        QpSolution with primal, multipliers, active set and status

    Raises:
        ProblemValidationError: If the problem data violate the input contract
        SolverError: If the iteration cap is hit or HiGHS fails numerically
    """
    tolerances = tolerances or config.tolerances
    problem.validate(tolerances)
    return _ActiveSetSolver(problem, tolerances).solve()


def solve_lp(problem: QpProblem, tolerances: Tolerances | None = None) -> QpSolution:
    """
    Solve an LP; the answer is a vertex whose basis is the reported active set.

    Raises:
        ProblemValidationError: If the Hessian is not identically zero
    """
    if not problem.is_linear:
        raise ProblemValidationError("solve_lp requires a zero Hessian")
    return solve_qp(problem, tolerances)


class _RowBasis:
    """Orthonormal basis of a growing row space."""

    def __init__(self, n: int) -> None:
        self._vectors: list[np.ndarray] = []
        self._n = n

    def residual(self, row: np.ndarray) -> np.ndarray:
        residual = row.astype(float).copy()
        for _ in range(2):
            for vector in self._vectors:
                residual -= (vector @ residual) * vector
        return residual

    def try_add(self, row: np.ndarray, tol: float = 1e-9) -> bool:
        """Add the row if it is independent of the basis."""
        norm = float(np.linalg.norm(row))
        if norm == 0.0:
            return False
        residual = self.residual(row)
        size = float(np.linalg.norm(residual))
        if size <= tol * norm:
            return False
        self._vectors.append(residual / size)
        return True


class _ActiveSetSolver:
    """Working-set iteration for one problem instance."""

    def __init__(self, problem: QpProblem, tolerances: Tolerances) -> None:
        self.problem = problem
        self.tol = tolerances
        self.H = 0.5 * (problem.hessian + problem.hessian.T)
        self.f = problem.linear_cost
        self.G = problem.ineq_matrix
        self.h = problem.ineq_rhs
        self.E = problem.eq_matrix
        self.e = problem.eq_rhs
        self.n = problem.n_vars
        self.m = problem.n_ineq
        self.p = problem.n_eq
        self.row_norms = np.linalg.norm(self.G, axis=1) if self.m else np.zeros(0)
        self.hess_scale = max(1.0, float(np.max(np.abs(self.H)))) if self.n else 1.0
        self.max_iterations = 50 * (self.n + self.m) + 100

        # Rows with a single nonzero act as variable bounds.
        self.bound_var = np.full(self.m, -1, dtype=int)
        for i in range(self.m):
            nonzeros = np.flatnonzero(self.G[i])
            if nonzeros.size == 1:
                self.bound_var[i] = int(nonzeros[0])

        basis = _RowBasis(self.n)
        # All-zero rows (pure θ conditions) are checked by phase one, not counted here.
        nonzero_eq = [row for row in self.E if np.any(row)]
        independent_eq = sum(basis.try_add(row) for row in nonzero_eq)
        self.eq_rank_deficient = independent_eq < len(nonzero_eq)
        self._stat_tol = self.tol.stationarity
        self._dual_tol = self.tol.stationarity

    # ------------------------------------------------------------------ driver

    def solve(self) -> QpSolution:
        if self.n == 0:
            return self._solve_empty()

        start = self._phase_one()
        if isinstance(start, QpSolution):
            return start
        x, working = start

        scale = 1.0 + max(
            float(np.max(np.abs(self.f), initial=0.0)),
            self.hess_scale * (1.0 + float(np.max(np.abs(x), initial=0.0))),
        )
        self._stat_tol = 0.1 * self.tol.stationarity * scale
        self._dual_tol = self.tol.stationarity * scale
        return self._iterate(x, working)

    def _solve_empty(self) -> QpSolution:
        feasible = bool(np.all(self.h >= -self.tol.feasibility)) and bool(
            np.all(np.abs(self.e) <= self.tol.feasibility)
        )
        if not feasible:
            return QpSolution(status=SolveStatus.INFEASIBLE, primal=np.zeros(0))
        return QpSolution(
            status=SolveStatus.OPTIMAL,
            primal=np.zeros(0),
            objective=0.0,
            ineq_duals=np.zeros(self.m),
            eq_duals=np.zeros(self.p),
            inactive_set=tuple(range(self.m)),
        )

    # --------------------------------------------------------------- phase one

    def _linprog(self, cost: np.ndarray):
        return linprog(
            cost,
            A_ub=self.G if self.m else None,
            b_ub=self.h if self.m else None,
            A_eq=self.E if self.p else None,
            b_eq=self.e if self.p else None,
            bounds=(None, None),
            method="highs-ds",
            options=HIGHS_OPTIONS,
        )

    def _phase_one(self) -> QpSolution | tuple[np.ndarray, list[int]]:
        result = self._linprog(self.f)
        if result.status in (2, 3) and np.any(self.f):
            # HiGHS may report "infeasible or unbounded"; a zero objective separates them.
            feasible = self._linprog(np.zeros(self.n))
            if feasible.status == 0:
                if self.problem.is_linear:
                    logger.debug("LP is unbounded")
                    return QpSolution(
                        status=SolveStatus.UNBOUNDED,
                        primal=feasible.x,
                        certificate=self._recession_ray(),
                    )
                result = feasible
        if result.status == 2:
            logger.debug("Problem is infeasible")
            return QpSolution(
                status=SolveStatus.INFEASIBLE,
                primal=np.full(self.n, np.nan),
                certificate=self._farkas_certificate(),
            )
        if result.status != 0:
            raise SolverError(f"Phase-one LP failed: {result.message}")

        x = np.asarray(result.x, dtype=float)
        working = self._initial_working_set(x)
        return self._project(x, working), working

    def _recession_ray(self) -> np.ndarray | None:
        result = linprog(
            self.f,
            A_ub=self.G if self.m else None,
            b_ub=np.zeros(self.m) if self.m else None,
            A_eq=self.E if self.p else None,
            b_eq=np.zeros(self.p) if self.p else None,
            bounds=(-1.0, 1.0),
            method="highs",
        )
        if result.status != 0 or result.fun >= 0:
            return None
        return np.asarray(result.x) / np.linalg.norm(result.x)

    def _farkas_certificate(self) -> np.ndarray | None:
        """y ≥ 0, w free with Gᵀy + Eᵀw = 0 and hᵀy + eᵀw = −1."""
        a_eq = np.vstack(
            [
                np.hstack([self.G.T, self.E.T]),
                np.concatenate([self.h, self.e])[None, :],
            ]
        )
        b_eq = np.concatenate([np.zeros(self.n), [-1.0]])
        bounds = [(0.0, None)] * self.m + [(None, None)] * self.p
        result = linprog(
            np.zeros(self.m + self.p), A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs"
        )
        if result.status != 0:
            return None
        return np.asarray(result.x)

    def _initial_working_set(self, x: np.ndarray) -> list[int]:
        if self.m == 0:
            return []
        slack = self.h - self.G @ x
        x_scale = float(np.max(np.abs(x), initial=0.0))
        threshold = 1e-7 * (1.0 + np.abs(self.h) + self.row_norms * x_scale)
        basis = _RowBasis(self.n)
        for row in self.E:
            basis.try_add(row)
        working = []
        for i in np.flatnonzero(slack <= threshold):
            if basis.try_add(self.G[i]):
                working.append(int(i))
        return working

    def _project(self, x: np.ndarray, working: list[int]) -> np.ndarray:
        """Minimum-norm correction onto the working equalities."""
        rows = np.vstack([self.E, self.G[working]])
        if rows.shape[0] == 0:
            return x
        rhs = np.concatenate([self.e, self.h[working]])
        correction = np.linalg.lstsq(rows, rows @ x - rhs, rcond=None)[0]
        return x - correction

    # -------------------------------------------------------------- iteration

    def _partition(self, working: list[int]) -> tuple[np.ndarray, list[int], list[int]]:
        """Split the working set into bound rows (fixing a variable) and general rows."""
        fixed = np.zeros(self.n, dtype=bool)
        general: list[int] = []
        bounds: list[int] = []
        for i in working:
            j = self.bound_var[i]
            if j >= 0 and not fixed[j]:
                fixed[j] = True
                bounds.append(i)
            else:
                general.append(i)
        return ~fixed, general, bounds

    def _step(self, gradient: np.ndarray, working: list[int]) -> tuple[np.ndarray | None, bool]:
        free, general, _ = self._partition(working)
        n_free = int(free.sum())
        if n_free == 0:
            return None, False
        rows = np.vstack([self.E[:, free], self.G[general][:, free]])
        basis = null_space(rows) if rows.shape[0] else np.eye(n_free)
        if basis.shape[1] == 0:
            return None, False

        reduced_gradient = basis.T @ gradient[free]
        if float(np.max(np.abs(reduced_gradient))) <= self._stat_tol:
            return None, False

        reduced_hessian = basis.T @ self.H[np.ix_(free, free)] @ basis
        eigenvalues, eigenvectors = np.linalg.eigh(reduced_hessian)
        curved = eigenvalues > self.tol.psd * self.hess_scale
        coefficients = eigenvectors.T @ reduced_gradient

        flat = coefficients[~curved]
        if flat.size and float(np.linalg.norm(flat)) > self._stat_tol:
            direction = -(eigenvectors[:, ~curved] @ flat)
            is_ray = True
        else:
            direction = -(
                eigenvectors[:, curved] @ (coefficients[curved] / eigenvalues[curved])
            )
            is_ray = False

        step = np.zeros(self.n)
        step[free] = basis @ direction
        if not np.any(step):
            return None, False
        return step, is_ray

    def _multipliers(
        self, gradient: np.ndarray, working: list[int]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Multipliers of the working rows (in working order) and of the equalities."""
        free, general, bounds = self._partition(working)
        rows = np.vstack([self.E, self.G[general]])
        if rows.shape[0] and free.any():
            mu = np.linalg.lstsq(rows[:, free].T, -gradient[free], rcond=None)[0]
        else:
            mu = np.zeros(rows.shape[0])
        column_residual = gradient + rows.T @ mu

        values = {i: float(mu[self.p + k]) for k, i in enumerate(general)}
        for i in bounds:
            j = self.bound_var[i]
            values[i] = float(-column_residual[j] / self.G[i, j])
        return np.array([values[i] for i in working]), mu[: self.p]

    def _ratio_test(
        self, x: np.ndarray, step: np.ndarray, working: list[int], is_ray: bool
    ) -> tuple[float, int | None]:
        alpha = np.inf if is_ray else 1.0
        if self.m == 0:
            return alpha, None
        rate = self.G @ step
        step_size = float(np.max(np.abs(step)))
        moving = rate > 1e-12 * (self.row_norms * step_size)
        moving[working] = False
        if not moving.any():
            return alpha, None
        slack = np.maximum(self.h - self.G @ x, 0.0)
        ratios = np.full(self.m, np.inf)
        ratios[moving] = slack[moving] / rate[moving]
        blocking = int(np.argmin(ratios))
        if ratios[blocking] <= alpha:
            return float(ratios[blocking]), blocking
        return alpha, None

    def _iterate(self, x: np.ndarray, working: list[int]) -> QpSolution:
        zero_steps = 0
        for iteration in range(1, self.max_iterations + 1):
            gradient = self.H @ x + self.f
            step, is_ray = self._step(gradient, working)

            if step is None:
                duals, eq_duals = self._multipliers(gradient, working)
                negative = [k for k, value in enumerate(duals) if value < -self._dual_tol]
                if not negative:
                    return self._finish(x, working, duals, eq_duals, iteration)
                if zero_steps > BLAND_AFTER:
                    drop = min(working[k] for k in negative)
                else:
                    drop = working[min(negative, key=lambda k: (duals[k], working[k]))]
                working.remove(drop)
                continue

            alpha, blocking = self._ratio_test(x, step, working, is_ray)
            if blocking is None and is_ray:
                logger.debug(f"Unbounded ray found after {iteration} iterations")
                return QpSolution(
                    status=SolveStatus.UNBOUNDED,
                    primal=x,
                    certificate=step / np.linalg.norm(step),
                    iterations=iteration,
                )
            x = x + alpha * step
            if blocking is not None:
                working.append(blocking)
            zero_steps = zero_steps + 1 if alpha <= 1e-14 else 0

        raise SolverError(f"Active-set iteration cap ({self.max_iterations}) reached")

    def _finish(
        self,
        x: np.ndarray,
        working: list[int],
        duals: np.ndarray,
        eq_duals: np.ndarray,
        iterations: int,
    ) -> QpSolution:
        ineq_duals = np.zeros(self.m)
        for k, i in enumerate(working):
            ineq_duals[i] = max(float(duals[k]), 0.0)

        if self.m:
            slack = self.h - self.G @ x
            x_scale = float(np.max(np.abs(x), initial=0.0))
            threshold = self.tol.activity * (1.0 + np.abs(self.h) + self.row_norms * x_scale)
            is_active = slack <= threshold
            is_active[working] = True
        else:
            is_active = np.zeros(0, dtype=bool)
        active = tuple(int(i) for i in np.flatnonzero(is_active))
        inactive = tuple(int(i) for i in np.flatnonzero(~is_active))

        degenerate = (
            self.eq_rank_deficient
            or len(active) > len(working)
            or any(ineq_duals[i] <= self._dual_tol for i in active)
        )
        if degenerate:
            logger.debug(f"Degenerate active set {active}")

        return QpSolution(
            status=SolveStatus.OPTIMAL,
            primal=x,
            objective=self.problem.objective(x),
            ineq_duals=ineq_duals,
            eq_duals=np.asarray(eq_duals, dtype=float),
            active_set=active,
            inactive_set=inactive,
            working_set=tuple(sorted(working)),
            degenerate=degenerate,
            iterations=iterations,
        )
