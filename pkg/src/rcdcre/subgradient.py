"""Minimum-norm element of the collected subdifferential plus normal cone."""

from dataclasses import dataclass, field

import numpy as np

from ..qp import QpProblem, check_kkt, solve_qp
from ..utils.config import Tolerances
from ..utils.logger import get_logger

logger = get_logger(__name__)

# Rows closer than this (relative) are treated as the same generator
DEDUP_TOL = 1e-10


@dataclass
class SubgradientBundle:
    """
    v = Σ ηⱼ uⱼ + Σ ζₖ nₖ with η in the simplex and ζ ≥ 0, of least norm.

    `gradients` and `normals` hold one vector per row.
    """

    gradients: np.ndarray
    normals: np.ndarray
    direction: np.ndarray
    weights: np.ndarray
    cone_weights: np.ndarray
    kkt_ok: bool = True
    scale: float = field(init=False)

    def __post_init__(self) -> None:
        norms = np.linalg.norm(self.gradients, axis=1) if self.gradients.size else np.zeros(1)
        self.scale = max(1.0, float(np.max(norms)))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.direction))

    def certifies(self, tol: float) -> bool:
        """‖v‖ small relative to the gradients: 0 lies in ∂𝒥* + 𝒩_Θ."""
        return self.norm <= tol * self.scale


def unique_rows(rows: np.ndarray, dimension: int) -> np.ndarray:
    """Drop rows that repeat an earlier one within a relative tolerance."""
    rows = np.asarray(rows, dtype=float).reshape(-1, dimension)
    kept: list[np.ndarray] = []
    for row in rows:
        scale = 1.0 + np.linalg.norm(row)
        if all(np.linalg.norm(row - other) > DEDUP_TOL * scale for other in kept):
            kept.append(row)
    return np.array(kept).reshape(len(kept), dimension)


def subgradient_direction(
    gradients: np.ndarray,
    normals: np.ndarray | None = None,
    tolerances: Tolerances | None = None,
) -> SubgradientBundle:
    """
    Solve min ‖Uη + Nζ‖² s.t. 1ᵀη = 1, η ≥ 0, ζ ≥ 0.

    Args:
        gradients: (m, d) gradients of the pieces met at θ*, m ≥ 1
        normals: (c, d) outward normals of the coupling rows active at θ*
        tolerances: Solver tolerances

    Returns:
        SubgradientBundle with the minimizer v and its weights
    """
    gradients = np.atleast_2d(np.asarray(gradients, dtype=float))
    d = gradients.shape[1]
    if gradients.shape[0] == 0:
        raise ValueError("subgradient direction needs at least one gradient")
    gradients = unique_rows(gradients, d)
    normals = np.zeros((0, d)) if normals is None else np.asarray(normals, dtype=float)
    normals = normals.reshape(-1, d)
    lengths = np.linalg.norm(normals, axis=1)
    # Only the cone matters, so generators are kept at unit length
    normals = unique_rows(normals[lengths > 0] / lengths[lengths > 0, None], d)
    m, c = gradients.shape[0], normals.shape[0]

    basis = np.vstack([gradients, normals]).T
    n = m + c
    problem = QpProblem(
        hessian=2.0 * basis.T @ basis,
        linear_cost=np.zeros(n),
        ineq_matrix=-np.eye(n),
        ineq_rhs=np.zeros(n),
        eq_matrix=np.concatenate([np.ones(m), np.zeros(c)])[None, :],
        eq_rhs=np.ones(1),
    )
    solution = solve_qp(problem, tolerances)
    report = check_kkt(problem, solution, tolerances)
    if not report.ok:
        logger.warning(f"Subgradient QP failed its KKT check: {report}")

    weights = np.maximum(solution.primal[:m], 0.0)
    cone_weights = np.maximum(solution.primal[m:], 0.0)
    direction = gradients.T @ weights + normals.T @ cone_weights
    bundle = SubgradientBundle(
        gradients=gradients,
        normals=normals,
        direction=direction,
        weights=weights,
        cone_weights=cone_weights,
        kkt_ok=report.ok,
    )
    logger.debug(f"Subgradient bundle: {m} gradients, {c} normals, ‖v‖ = {bundle.norm:.3e}")
    return bundle
