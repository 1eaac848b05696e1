"""Brute-force critical-region enumeration over a small θ box."""

from collections.abc import Sequence
from itertools import product

import numpy as np

from ..utils.config import Tolerances
from ..utils.exceptions import ParametricError, RegionDimensionError
from ..utils.logger import get_logger
from .piece import ParametricPiece, ParametricQp, combine_pieces, evaluate_at

logger = get_logger(__name__)

MAX_DIMENSION = 3
# Pieces whose inscribed ball is smaller than this are facets, not regions
MIN_RADIUS = 1e-9


def enumerate_regions_bruteforce(
    problems: Sequence[ParametricQp],
    box: np.ndarray,
    grid: int = 21,
    tolerances: Tolerances | None = None,
) -> list[ParametricPiece]:
    """
    Distinct pieces of Σᵢ Jᵢ(θ) over a box, found by sweeping a grid.

    Every area is evaluated at every grid point and the per-area pieces are
    summed. Pieces are identified by their generating active sets; pieces
    with no volume inside the box are discarded.

    Args:
        problems: Area problems sharing one θ (penalized ones never fail)
        box: (d, 2) array of lower and upper bounds
        grid: Points per axis
        tolerances: Solver tolerances

    Returns:
        Pieces in order of discovery

    Raises:
        RegionDimensionError: If the box has more than three dimensions
        ParametricError: If the box is malformed or does not match the problems
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    dimension = box.shape[0]
    if dimension > MAX_DIMENSION:
        raise RegionDimensionError(dimension)
    if np.any(box[:, 0] >= box[:, 1]) or not np.all(np.isfinite(box)):
        raise ParametricError(f"box must be bounded with lower < upper, got {box.tolist()}")
    for problem in problems:
        if problem.theta_dim != dimension:
            raise ParametricError(
                f"area {problem.index} has θ dimension {problem.theta_dim}, box has {dimension}"
            )
    if grid < 2:
        raise ParametricError(f"grid needs at least 2 points per axis, got {grid}")

    axes = [np.linspace(low, high, grid) for low, high in box]
    found: dict[tuple, ParametricPiece] = {}
    rejected: set[tuple] = set()
    for point in product(*axes):
        theta = np.array(point, dtype=float)
        piece = combine_pieces([evaluate_at(problem, theta, tolerances)[1] for problem in problems])
        if piece.key in found or piece.key in rejected:
            continue
        _, radius = piece.chebyshev_center(box)
        if radius <= MIN_RADIUS:
            rejected.add(piece.key)
            continue
        found[piece.key] = piece

    logger.info(f"Found {len(found)} critical regions on a {grid}^{dimension} grid")
    return list(found.values())


def shared_facet_points(
    first: ParametricPiece,
    second: ParametricPiece,
    box: np.ndarray,
    rng: np.random.Generator,
    count: int = 5,
) -> np.ndarray:
    """
    Points on the common facet of two adjacent pieces (empty if they do not touch).

    The facet is taken as the part of one region whose points also satisfy
    the other's rows within a small tolerance; points are drawn by projecting
    random box points onto a separating row and keeping those in both regions.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    points = []
    for row, rhs in zip(first.region_matrix, first.region_rhs):
        for _ in range(200 * count):
            candidate = rng.uniform(box[:, 0], box[:, 1])
            candidate = candidate - (row @ candidate - rhs) * row
            if first.contains(candidate, tol=1e-9) and second.contains(candidate, tol=1e-9):
                points.append(candidate)
                if len(points) == count:
                    return np.array(points)
    return np.array(points).reshape(-1, box.shape[0])
