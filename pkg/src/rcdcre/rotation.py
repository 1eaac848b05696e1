"""Coordinate system rotation compounded from Givens rotations."""

import numpy as np

from ..utils.logger import get_logger

logger = get_logger(__name__)


def givens(a: float, b: float) -> tuple[float, float]:
    """c, s with [[c, s], [-s, c]] @ [a, b] = [r, 0] and r ≥ 0."""
    r = float(np.hypot(a, b))
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def pivot_index(v: np.ndarray) -> int:
    """Largest |component|; ties go to the lowest index."""
    magnitudes = np.abs(np.asarray(v, dtype=float))
    return int(np.flatnonzero(magnitudes == magnitudes.max())[0])


def build_rotation(v: np.ndarray, pivot: int | None = None) -> np.ndarray:
    """
    Orthogonal R with R·v/‖v‖ = e_k.

    One Givens rotation in the plane (k, j) zeroes each other component j in
    ascending order, so at most dim − 1 rotations are compounded. A vector
    already pointing along −e_k gets a half turn in the plane (k, j) for the
    first j ≠ k.

    Args:
        v: Direction to align with a coordinate axis
        pivot: Target axis k, by default the largest |component|

    Returns:
        (d, d) orthogonal matrix

    Raises:
        ValueError: If v is zero
    """
    v = np.asarray(v, dtype=float).ravel()
    length = float(np.linalg.norm(v))
    if length == 0.0 or not np.isfinite(length):
        raise ValueError("cannot build a rotation from a zero direction")
    d = v.size
    k = pivot_index(v) if pivot is None else pivot
    w = v / length
    rotation = np.eye(d)
    for j in range(d):
        if j == k or w[j] == 0.0:
            continue
        c, s = givens(w[k], w[j])
        plane = np.eye(d)
        plane[k, k], plane[k, j] = c, s
        plane[j, k], plane[j, j] = -s, c
        rotation = plane @ rotation
        w = plane @ w
    if w[k] < 0.0:
        if d == 1:
            rotation = -rotation
        else:
            j = 1 if k == 0 else 0
            flip = np.eye(d)
            flip[k, k] = flip[j, j] = -1.0
            rotation = flip @ rotation
    logger.debug(f"Rotation onto axis {k} from direction {np.round(v / length, 6).tolist()}")
    return rotation
