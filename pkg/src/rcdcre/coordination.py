"""Coordination solves over the intersection of critical regions."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..grid import CouplingSet
from ..parametric import ParametricPiece, combine_pieces
from ..qp import QpProblem, QpSolution, SolveStatus, solve_qp
from ..utils.config import Tolerances
from ..utils.exceptions import CoordinationError, StepsizeViolationError
from ..utils.logger import get_logger
from .config import AlgoConfig

logger = get_logger(__name__)

# Coupling rows with a smaller free part are constant during a solve
FREE_ROW_TOL = 1e-12


@dataclass
class CoordinationResult:
    """Minimizer of one coordination solve and the coupling-row multipliers ν."""

    theta: np.ndarray
    duals: np.ndarray
    objective: float
    violation: np.ndarray
    solution: QpSolution

    @property
    def dual_sum(self) -> float:
        return float(np.sum(np.maximum(self.duals, 0.0)))


def _as_piece(pieces: ParametricPiece | Sequence[ParametricPiece]) -> ParametricPiece:
    if isinstance(pieces, ParametricPiece):
        return pieces
    return combine_pieces(list(pieces))


def penalized_value(
    piece: ParametricPiece, coupling: CouplingSet, theta: np.ndarray, sigma: float
) -> float:
    """Σᵢ𝒥ᵢ(θ) + σ·1ᵀmax{Dθ − r, 0} on the piece."""
    return piece.value(theta) + sigma * float(np.sum(coupling.violation(theta)))


def _split(theta: np.ndarray, free: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pinned part of θ (free entries zeroed) and the selector onto free coordinates."""
    base = np.array(theta, dtype=float)
    base[free] = 0.0
    selector = np.eye(base.size)[:, free]
    return base, selector


def _moving_rows(coupling: CouplingSet, selector: np.ndarray) -> np.ndarray:
    """Coupling rows that depend on at least one free coordinate."""
    norms = np.linalg.norm(coupling.matrix @ selector, axis=1)
    return np.flatnonzero(norms > FREE_ROW_TOL * (1.0 + np.linalg.norm(coupling.matrix, axis=1)))


def solve_l1_coordination(
    pieces: ParametricPiece | Sequence[ParametricPiece],
    coupling: CouplingSet,
    fixed: np.ndarray,
    free: np.ndarray,
    sigma: float,
    tolerances: Tolerances | None = None,
) -> CoordinationResult:
    """
    Minimize Σᵢ𝒥ᵢ,ₛ(θ) + σ·1ᵀmax{Dθ − r, 0} over ∩ᵢCRᵢ,ₛ with θ_¬i pinned.

    The hinge is written with one variable per coupling row, t ≥ Dθ − r and
    t ≥ 0, so the whole solve is a single QP over (θ_free, t).

    Args:
        pieces: The per-area pieces of one probe, or their combination
        coupling: Coupling polyhedron in the current frame
        fixed: Current θ; entries outside `free` stay at these values
        free: Coordinates the optimizing area owns
        sigma: ℓ1 weight, positive
        tolerances: Solver tolerances

    Returns:
        CoordinationResult with ν the multipliers of the rows t ≥ Dθ − r

    Raises:
        StepsizeViolationError: If the regions do not meet the pinned coordinates
        CoordinationError: If the solve is unbounded
    """
    if sigma <= 0.0:
        raise CoordinationError(f"ℓ1 weight must be positive, got {sigma}")
    piece = _as_piece(pieces)
    free = np.asarray(free, dtype=int)
    base, selector = _split(fixed, free)
    rows = _moving_rows(coupling, selector)
    nf, c = free.size, rows.size
    regions = piece.region_matrix @ selector
    couplings = coupling.matrix[rows] @ selector

    hessian = np.zeros((nf + c, nf + c))
    hessian[:nf, :nf] = selector.T @ piece.hessian @ selector
    linear = np.concatenate(
        [selector.T @ (piece.hessian @ base + piece.linear), np.full(c, float(sigma))]
    )
    ineq_matrix = np.vstack(
        [
            np.hstack([regions, np.zeros((regions.shape[0], c))]),
            np.hstack([couplings, -np.eye(c)]),
            np.hstack([np.zeros((c, nf)), -np.eye(c)]),
        ]
    )
    ineq_rhs = np.concatenate(
        [
            piece.region_rhs - piece.region_matrix @ base,
            coupling.rhs[rows] - coupling.matrix[rows] @ base,
            np.zeros(c),
        ]
    )
    solution = _solve(QpProblem(hessian, linear, ineq_matrix, ineq_rhs), tolerances)

    theta = base + selector @ solution.primal[:nf]
    start = regions.shape[0]
    duals = np.zeros(coupling.n_rows)
    duals[rows] = solution.ineq_duals[start : start + c]
    return CoordinationResult(
        theta=theta,
        duals=duals,
        objective=penalized_value(piece, coupling, theta, sigma),
        violation=coupling.violation(theta),
        solution=solution,
    )


def solve_hard_coordination(
    pieces: ParametricPiece | Sequence[ParametricPiece],
    coupling: CouplingSet,
    fixed: np.ndarray,
    free: np.ndarray | None = None,
    tolerances: Tolerances | None = None,
) -> CoordinationResult:
    """
    Minimize Σᵢ𝒥ᵢ,ₛ(θ) over ∩ᵢCRᵢ,ₛ ∩ {Dθ ≤ r}, by default over every coordinate.

    Raises:
        StepsizeViolationError: If the regions and the coupling set do not meet
        CoordinationError: If the solve is unbounded
    """
    piece = _as_piece(pieces)
    fixed = np.asarray(fixed, dtype=float)
    free = np.arange(fixed.size) if free is None else np.asarray(free, dtype=int)
    base, selector = _split(fixed, free)
    rows = _moving_rows(coupling, selector)
    pinned = np.setdiff1d(np.arange(coupling.n_rows), rows)
    residual = coupling.residual(fixed)[pinned]
    if np.any(residual > 1e-9 * (1.0 + np.abs(coupling.rhs[pinned]))):
        raise StepsizeViolationError("pinned coordinates violate the coupling set")
    problem = QpProblem(
        hessian=selector.T @ piece.hessian @ selector,
        linear_cost=selector.T @ (piece.hessian @ base + piece.linear),
        ineq_matrix=np.vstack([piece.region_matrix @ selector, coupling.matrix[rows] @ selector]),
        ineq_rhs=np.concatenate(
            [
                piece.region_rhs - piece.region_matrix @ base,
                coupling.rhs[rows] - coupling.matrix[rows] @ base,
            ]
        ),
    )
    solution = _solve(problem, tolerances)
    theta = base + selector @ solution.primal
    duals = np.zeros(coupling.n_rows)
    duals[rows] = solution.ineq_duals[piece.region_rhs.size :]
    return CoordinationResult(
        theta=theta,
        duals=duals,
        objective=piece.value(theta),
        violation=coupling.violation(theta),
        solution=solution,
    )


def _solve(problem: QpProblem, tolerances: Tolerances | None) -> QpSolution:
    solution = solve_qp(problem, tolerances)
    if solution.status is SolveStatus.INFEASIBLE:
        raise StepsizeViolationError("critical regions at the probe miss the pinned coordinates")
    if solution.status is SolveStatus.UNBOUNDED:
        raise CoordinationError("coordination problem is unbounded")
    return solution


def adapt_sigma(duals: np.ndarray, sigma: float, config: AlgoConfig | None = None) -> float:
    """
    Grow σ when it does not clear the multiplier sum of the coupling rows.

    σ' = growth·(1ᵀν + margin) if σ ≤ 1ᵀν + margin, capped at `sigma_max`.
    """
    config = config or AlgoConfig()
    threshold = float(np.sum(np.maximum(np.asarray(duals, dtype=float), 0.0))) + config.sigma_margin
    if sigma > threshold:
        return sigma
    grown = min(config.sigma_growth * threshold, config.sigma_max)
    if grown <= sigma:
        return sigma
    logger.info(
        f"ℓ1 weight raised from {sigma:.3e} to {grown:.3e} (1ᵀν + margin = {threshold:.3e})"
    )
    return grown
