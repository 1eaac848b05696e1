"""Independent KKT residual checker."""

from dataclasses import dataclass

import numpy as np

from ..utils.config import Tolerances, config
from .problem import QpProblem, QpSolution


@dataclass
class KktReport:
    """Scaled residuals of the four KKT blocks."""

    stationarity: float
    primal_feasibility: float
    dual_feasibility: float
    complementarity: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return max(
            self.stationarity,
            self.primal_feasibility,
            self.dual_feasibility,
            self.complementarity,
        ) <= self.tolerance


def check_kkt(
    problem: QpProblem,
    solution: QpSolution,
    tolerances: Tolerances | None = None,
) -> KktReport:
    """
    Recompute KKT residuals from the raw problem data.

    Residuals are relative: each block is divided by one plus the magnitude of
    the terms that produce it, so MW-scale and unit-scale problems share one
    tolerance.

    Args:
        problem: The solved problem
        solution: Solver output (must carry primal and multipliers)
        tolerances: Tolerance record

    Returns:
        KktReport with per-block residuals
    """
    tolerances = tolerances or config.tolerances
    x = solution.primal
    lam = solution.ineq_duals
    nu = solution.eq_duals
    G, h = problem.ineq_matrix, problem.ineq_rhs
    E, e = problem.eq_matrix, problem.eq_rhs

    hx = problem.hessian @ x
    g_lam = G.T @ lam if problem.n_ineq else np.zeros_like(x)
    e_nu = E.T @ nu if problem.n_eq else np.zeros_like(x)
    gradient = hx + problem.linear_cost + g_lam + e_nu
    term_scale = 1.0 + max(
        float(np.max(np.abs(hx), initial=0.0)),
        float(np.max(np.abs(problem.linear_cost), initial=0.0)),
        float(np.max(np.abs(g_lam), initial=0.0)),
        float(np.max(np.abs(e_nu), initial=0.0)),
    )
    stationarity = float(np.max(np.abs(gradient), initial=0.0)) / term_scale

    x_scale = float(np.max(np.abs(x), initial=0.0))
    primal = 0.0
    complementarity = 0.0
    if problem.n_ineq:
        row_scale = 1.0 + np.abs(h) + np.linalg.norm(G, axis=1) * x_scale
        slack = h - G @ x
        primal = float(np.max(np.maximum(-slack, 0.0) / row_scale))
        dual_scale = 1.0 + float(np.max(np.abs(lam)))
        complementarity = float(np.max(np.abs(lam * slack) / (row_scale * dual_scale)))
    if problem.n_eq:
        row_scale = 1.0 + np.abs(e) + np.linalg.norm(E, axis=1) * x_scale
        primal = max(primal, float(np.max(np.abs(E @ x - e) / row_scale)))

    dual = float(np.max(np.maximum(-lam, 0.0), initial=0.0))
    return KktReport(
        stationarity=stationarity,
        primal_feasibility=primal,
        dual_feasibility=dual,
        complementarity=complementarity,
        tolerance=max(tolerances.stationarity, tolerances.feasibility),
    )
