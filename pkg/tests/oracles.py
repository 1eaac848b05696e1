"""Brute-force reference solvers used by the test-suite."""

from itertools import combinations

import numpy as np

from src.qp import QpProblem


def brute_force_qp(problem: QpProblem, tol: float = 1e-9) -> float:
    """
    Best objective over every KKT-consistent active subset.

    Requires a positive definite Hessian so each subset has at most one KKT point.
    """
    H, f = problem.hessian, problem.linear_cost
    G, h = problem.ineq_matrix, problem.ineq_rhs
    E, e = problem.eq_matrix, problem.eq_rhs
    n, m, p = problem.n_vars, problem.n_ineq, problem.n_eq
    best = np.inf
    for size in range(0, min(m, n - p) + 1):
        for subset in combinations(range(m), size):
            rows = np.vstack([G[list(subset)], E])
            k = rows.shape[0]
            kkt = np.block([[H, rows.T], [rows, np.zeros((k, k))]])
            rhs = np.concatenate([-f, h[list(subset)], e])
            try:
                solution = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x, lam = solution[:n], solution[n : n + size]
            if np.any(lam < -tol):
                continue
            if m and np.any(G @ x - h > tol * (1 + np.abs(h))):
                continue
            best = min(best, float(0.5 * x @ H @ x + f @ x))
    return best


def brute_force_lp(problem: QpProblem, tol: float = 1e-9) -> float:
    """Best objective over every basic feasible solution of a bounded LP."""
    f = problem.linear_cost
    G, h = problem.ineq_matrix, problem.ineq_rhs
    E, e = problem.eq_matrix, problem.eq_rhs
    n, m, p = problem.n_vars, problem.n_ineq, problem.n_eq
    best = np.inf
    for subset in combinations(range(m), n - p):
        rows = np.vstack([G[list(subset)], E])
        if abs(np.linalg.det(rows)) < 1e-12:
            continue
        x = np.linalg.solve(rows, np.concatenate([h[list(subset)], e]))
        if np.any(G @ x - h > tol * (1 + np.abs(h))):
            continue
        best = min(best, float(f @ x))
    return best


def random_qp(rng: np.random.Generator) -> QpProblem:
    """Feasible strictly convex QP with at most 5 variables and 8 inequalities."""
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 9))
    factor = rng.normal(size=(n, n))
    hessian = factor @ factor.T + 0.1 * np.eye(n)
    G = rng.normal(size=(m, n))
    anchor = rng.normal(size=n)
    h = G @ anchor + rng.uniform(0.0, 1.0, size=m)
    return QpProblem(hessian, rng.normal(size=n) * 3.0, G, h)


def random_lp(rng: np.random.Generator) -> QpProblem:
    """Feasible bounded LP: a unit box plus up to 12 - 2n random cuts."""
    n = int(rng.integers(2, 5))
    extra = int(rng.integers(0, 12 - 2 * n + 1))
    box = np.vstack([np.eye(n), -np.eye(n)])
    cuts = rng.normal(size=(extra, n))
    anchor = rng.uniform(-0.5, 0.5, size=n)
    G = np.vstack([box, cuts])
    h = np.concatenate([np.ones(2 * n), cuts @ anchor + rng.uniform(0.0, 1.0, size=extra)])
    return QpProblem.linear(rng.normal(size=n), ineq_matrix=G, ineq_rhs=h)
