"""Value-function slices and critical regions built from reported active sets."""

from dataclasses import dataclass, field
from typing import Any, Protocol, runtime_checkable

import numpy as np
from scipy.optimize import linprog

from ..qp import QpProblem, QpSolution, SolveStatus, solve_qp
from ..utils.config import Tolerances
from ..utils.exceptions import (
    InfeasibleParameterError,
    ParametricError,
    PenaltyConfigurationError,
)
from ..utils.logger import get_logger
from .penalty import PenalizedAreaProblem

logger = get_logger(__name__)

# Region rows whose θ part is this small (relative) are dropped as constant
ZERO_ROW = 1e-10
# Decimal places used to recognise duplicate region rows
DEDUP_DECIMALS = 9


@runtime_checkable
class ParametricQp(Protocol):
    """
    A QP whose right-hand sides are affine in θ:

        minimize ½xᵀHx + fᵀx   subject to  G x ≤ h + C θ,  E x = e + F θ
    """

    hessian: np.ndarray
    linear_cost: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    ineq_coupling: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    eq_coupling: np.ndarray

    @property
    def index(self) -> int: ...

    @property
    def n_vars(self) -> int: ...

    @property
    def theta_dim(self) -> int: ...

    @property
    def true_hessian(self) -> np.ndarray: ...

    @property
    def true_linear_cost(self) -> np.ndarray: ...

    def at(self, theta: np.ndarray) -> QpProblem: ...


def _matrix_to_json(matrix: np.ndarray) -> dict[str, Any]:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return {"rows": matrix.shape[0], "cols": matrix.shape[1], "data": matrix.ravel().tolist()}


def _matrix_from_json(data: dict[str, Any]) -> np.ndarray:
    return np.asarray(data["data"], dtype=float).reshape(data["rows"], data["cols"])


@dataclass
class ParametricPiece:
    """
    One value-function slice J(θ) = ½θᵀĤθ + f̂ᵀθ + ĉ valid on the critical
    region {θ : D̂θ ≤ r̂}.

    The slice prices slacks when the generating problem is penalized; the
    `true_*` slice is the same primal map priced at the unpenalized cost.
    Pieces summed over areas carry their parts in `components` and have no
    primal map.
    """

    area: int | None
    hessian: np.ndarray
    linear: np.ndarray
    constant: float
    region_matrix: np.ndarray
    region_rhs: np.ndarray
    active_set: tuple[int, ...] = ()
    working_set: tuple[int, ...] = ()
    degenerate: bool = False
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    true_hessian: np.ndarray | None = None
    true_linear: np.ndarray | None = None
    true_constant: float = 0.0
    primal_map: np.ndarray | None = None
    primal_offset: np.ndarray | None = None
    components: tuple["ParametricPiece", ...] = ()

    def __post_init__(self) -> None:
        if self.true_hessian is None:
            self.true_hessian = self.hessian
            self.true_linear = self.linear
            self.true_constant = self.constant

    @property
    def dimension(self) -> int:
        return self.linear.size

    @property
    def key(self) -> tuple:
        """Identity of the generating active sets."""
        if self.components:
            return tuple(component.key for component in self.components)
        return (self.area, self.working_set)

    def value(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(0.5 * theta @ self.hessian @ theta + self.linear @ theta + self.constant)

    def true_value(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(
            0.5 * theta @ self.true_hessian @ theta + self.true_linear @ theta + self.true_constant
        )

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        return self.hessian @ np.asarray(theta, dtype=float) + self.linear

    def residual(self, theta: np.ndarray) -> np.ndarray:
        return self.region_matrix @ np.asarray(theta, dtype=float) - self.region_rhs

    def contains(self, theta: np.ndarray, tol: float = 1e-7) -> bool:
        return bool(np.all(self.residual(theta) <= tol))

    def primal(self, theta: np.ndarray) -> np.ndarray:
        """Optimal x of the generating problem, affine in θ inside the region."""
        if self.primal_map is None:
            raise ParametricError("combined pieces carry no primal map")
        return self.primal_offset + self.primal_map @ np.asarray(theta, dtype=float)

    def chebyshev_center(self, box: np.ndarray | None = None) -> tuple[np.ndarray | None, float]:
        """
        Center and radius of the largest ball inside the region (and the box).

        Returns (None, 0.0) for an empty region and an infinite radius when
        the region is unbounded and no box is given.
        """
        matrix, rhs = self.region_matrix, self.region_rhs
        d = self.dimension
        if box is not None:
            box = np.asarray(box, dtype=float).reshape(d, 2)
            matrix = np.vstack([matrix, np.eye(d), -np.eye(d)])
            rhs = np.concatenate([rhs, box[:, 1], -box[:, 0]])
        if d == 0:
            feasible = bool(np.all(rhs >= -ZERO_ROW))
            return (np.zeros(0), np.inf) if feasible else (None, 0.0)

        norms = np.linalg.norm(matrix, axis=1)
        cost = np.zeros(d + 1)
        cost[-1] = -1.0
        result = linprog(
            cost,
            A_ub=np.hstack([matrix, norms[:, None]]) if rhs.size else None,
            b_ub=rhs if rhs.size else None,
            bounds=[(None, None)] * d + [(0.0, None)],
            method="highs",
        )
        if result.status == 3:
            return self.theta.copy(), np.inf
        if result.status != 0:
            return None, 0.0
        return np.asarray(result.x[:d]), float(result.x[-1])

    def interior_points(
        self,
        rng: np.random.Generator,
        count: int,
        box: np.ndarray | None = None,
        shrink: float = 0.9,
    ) -> np.ndarray:
        """Random points of the inscribed ball, so each lies strictly inside the region."""
        center, radius = self.chebyshev_center(box)
        if center is None or radius <= 0.0:
            return np.zeros((0, self.dimension))
        radius = min(radius, 1.0)
        directions = rng.standard_normal((count, self.dimension))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        lengths = rng.uniform(0.0, 1.0, count) ** (1.0 / self.dimension)
        return center + shrink * radius * lengths[:, None] * directions

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "area": self.area,
            "hessian": _matrix_to_json(self.hessian),
            "linear": self.linear.tolist(),
            "constant": self.constant,
            "true_hessian": _matrix_to_json(self.true_hessian),
            "true_linear": np.asarray(self.true_linear).tolist(),
            "true_constant": self.true_constant,
            "region_matrix": _matrix_to_json(self.region_matrix),
            "region_rhs": self.region_rhs.tolist(),
            "active_set": list(self.active_set),
            "working_set": list(self.working_set),
            "degenerate": self.degenerate,
            "theta": self.theta.tolist(),
        }
        if self.components:
            data["components"] = [component.to_dict() for component in self.components]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ParametricPiece":
        return cls(
            area=data["area"],
            hessian=_matrix_from_json(data["hessian"]),
            linear=np.asarray(data["linear"], dtype=float),
            constant=float(data["constant"]),
            true_hessian=_matrix_from_json(data["true_hessian"]),
            true_linear=np.asarray(data["true_linear"], dtype=float),
            true_constant=float(data["true_constant"]),
            region_matrix=_matrix_from_json(data["region_matrix"]),
            region_rhs=np.asarray(data["region_rhs"], dtype=float),
            active_set=tuple(data["active_set"]),
            working_set=tuple(data["working_set"]),
            degenerate=bool(data["degenerate"]),
            theta=np.asarray(data["theta"], dtype=float),
            components=tuple(cls.from_dict(part) for part in data.get("components", [])),
        )


def evaluate_at(
    problem: ParametricQp,
    theta: np.ndarray,
    tolerances: Tolerances | None = None,
) -> tuple[QpSolution, ParametricPiece]:
    """
    Solve an area problem at θ and build the piece of its reported active set.

    The KKT system of the working set is solved parametrically: rows that
    bound a single variable fix it affinely in θ, the remaining variables
    come from the general working rows and the equalities. The region holds
    the inactive rows at the mapped primal, nonnegative working multipliers,
    and any θ condition implied by dependent equality rows.

    Args:
        problem: Hard or big-M penalized area problem
        theta: Global boundary vector
        tolerances: Solver tolerances

    Returns:
        (solution at θ, piece)

    Raises:
        InfeasibleParameterError: If a hard problem is infeasible at θ
        PenaltyConfigurationError: If the problem is unbounded, or a penalized one infeasible
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
    if theta.size != problem.theta_dim:
        raise ParametricError(
            f"θ has dimension {theta.size}, area {problem.index} expects {problem.theta_dim}"
        )
    solution = solve_qp(problem.at(theta), tolerances)
    if solution.status is SolveStatus.UNBOUNDED:
        raise PenaltyConfigurationError(problem.index, f"unbounded at θ = {theta.tolist()}")
    if solution.status is SolveStatus.INFEASIBLE:
        if isinstance(problem, PenalizedAreaProblem):
            raise PenaltyConfigurationError(problem.index, "big-M problem reported infeasible")
        raise InfeasibleParameterError(problem.index)
    return solution, _build_piece(problem, solution, theta)


def _decompose(matrix: np.ndarray, n_cols: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Pseudo-inverse, left null space, right null space and rank."""
    n_rows = matrix.shape[0]
    if n_rows == 0 or n_cols == 0:
        return np.zeros((n_cols, n_rows)), np.eye(n_rows), np.eye(n_cols), 0
    u, s, vt = np.linalg.svd(matrix)
    rank = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
    pinv = vt[:rank].T @ np.diag(1.0 / s[:rank]) @ u[:, :rank].T
    return pinv, u[:, rank:], vt[rank:].T, rank


def _build_piece(
    problem: ParametricQp, solution: QpSolution, theta: np.ndarray
) -> ParametricPiece:
    G, h, C = problem.ineq_matrix, problem.ineq_rhs, problem.ineq_coupling
    E, e, F = problem.eq_matrix, problem.eq_rhs, problem.eq_coupling
    H = 0.5 * (problem.hessian + problem.hessian.T)
    f = problem.linear_cost
    n, d, p = problem.n_vars, theta.size, e.size
    working = list(solution.working_set)
    degenerate = solution.degenerate

    bound_of: dict[int, int] = {}
    general: list[int] = []
    for i in working:
        nonzeros = np.flatnonzero(G[i])
        if nonzeros.size == 1 and int(nonzeros[0]) not in bound_of:
            bound_of[int(nonzeros[0])] = i
        else:
            general.append(i)
    fixed = np.array(sorted(bound_of), dtype=int)
    free = np.setdiff1d(np.arange(n), fixed)
    bounds = [bound_of[j] for j in fixed]

    # Fixed variables: x_j = (h_i + C_i θ) / G_ij
    pivots = G[bounds, fixed] if fixed.size else np.zeros(0)
    fix_offset = h[bounds] / pivots if fixed.size else np.zeros(0)
    fix_slope = C[bounds] / pivots[:, None] if fixed.size else np.zeros((0, d))

    rows = np.vstack([E, G[general]]) if general else E
    rhs_offset = np.concatenate([e, h[general]]) - rows[:, fixed] @ fix_offset
    rhs_slope = np.vstack([F, C[general]]) - rows[:, fixed] @ fix_slope
    reduced = rows[:, free]
    pinv, left_null, right_null, rank = _decompose(reduced, free.size)
    nonzero_rows = int(np.sum(np.linalg.norm(reduced, axis=1) > 0)) if reduced.size else 0
    if rank < nonzero_rows:
        degenerate = True

    # x_F = p(θ) + Z y(θ) with Z spanning the null space of the working rows
    p_offset = pinv @ rhs_offset
    p_slope = pinv @ rhs_slope
    hff = H[np.ix_(free, free)]
    hfx = H[np.ix_(free, fixed)]
    reduced_hessian = right_null.T @ hff @ right_null
    x_offset = np.zeros(n)
    x_slope = np.zeros((n, d))
    x_offset[fixed] = fix_offset
    x_slope[fixed] = fix_slope
    if right_null.shape[1]:
        eigenvalues, eigenvectors = np.linalg.eigh(reduced_hessian)
        scale = max(1.0, float(np.max(np.abs(eigenvalues), initial=0.0)))
        curved = eigenvalues > 1e-9 * scale
        inverse = eigenvectors[:, curved] @ np.diag(1.0 / eigenvalues[curved]) @ (
            eigenvectors[:, curved].T
        )
        gradient_offset = hff @ p_offset + hfx @ fix_offset + f[free]
        gradient_slope = hff @ p_slope + hfx @ fix_slope
        y_offset = -inverse @ (right_null.T @ gradient_offset)
        y_slope = -inverse @ (right_null.T @ gradient_slope)
        if not curved.all():
            # Flat directions keep the solver's position; the slice does not depend on it.
            degenerate = True
            flat = eigenvectors[:, ~curved]
            y_solution = right_null.T @ (solution.primal[free] - p_offset - p_slope @ theta)
            y_offset = y_offset + flat @ (flat.T @ y_solution)
        x_offset[free] = p_offset + right_null @ y_offset
        x_slope[free] = p_slope + right_null @ y_slope
    else:
        x_offset[free] = p_offset
        x_slope[free] = p_slope

    # Multipliers from stationarity Hx + f + Gᵀλ + Eᵀν = 0
    g_offset = H @ x_offset + f
    g_slope = H @ x_slope
    mu_offset = -pinv.T @ g_offset[free]
    mu_slope = -pinv.T @ g_slope[free]
    lam_offset = np.zeros(len(working))
    lam_slope = np.zeros((len(working), d))
    position = {i: k for k, i in enumerate(working)}
    for k, i in enumerate(general):
        lam_offset[position[i]] = mu_offset[p + k]
        lam_slope[position[i]] = mu_slope[p + k]
    for j, i in zip(fixed, bounds):
        column = rows[:, j]
        lam_offset[position[i]] = -(g_offset[j] + column @ mu_offset) / G[i, j]
        lam_slope[position[i]] = -(g_slope[j] + column @ mu_slope) / G[i, j]

    # Region: inactive rows, λ ≥ 0, and θ conditions from dependent equalities
    inactive = np.setdiff1d(np.arange(h.size), working)
    region_rows = [G[inactive] @ x_slope - C[inactive], -lam_slope]
    region_rhs = [h[inactive] - G[inactive] @ x_offset, lam_offset]
    if left_null.shape[1]:
        condition = left_null.T @ rhs_slope
        offset = left_null.T @ rhs_offset
        region_rows += [condition, -condition]
        region_rhs += [-offset, offset]
    region_matrix, region_vector = _normalize_region(
        np.vstack([np.zeros((0, d))] + region_rows), np.concatenate(region_rhs)
    )

    true_hessian = 0.5 * (problem.true_hessian + problem.true_hessian.T)
    true_cost = problem.true_linear_cost
    return ParametricPiece(
        area=problem.index,
        hessian=_symmetric(x_slope.T @ H @ x_slope),
        linear=x_slope.T @ (H @ x_offset + f),
        constant=float(0.5 * x_offset @ H @ x_offset + f @ x_offset),
        true_hessian=_symmetric(x_slope.T @ true_hessian @ x_slope),
        true_linear=x_slope.T @ (true_hessian @ x_offset + true_cost),
        true_constant=float(0.5 * x_offset @ true_hessian @ x_offset + true_cost @ x_offset),
        region_matrix=region_matrix,
        region_rhs=region_vector,
        active_set=solution.active_set,
        working_set=solution.working_set,
        degenerate=degenerate,
        theta=theta.copy(),
        primal_map=x_slope,
        primal_offset=x_offset,
    )


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _normalize_region(matrix: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit-norm rows; constant rows dropped; duplicates reduced to the tightest."""
    d = matrix.shape[1]
    norms = np.linalg.norm(matrix, axis=1)
    keep = norms > ZERO_ROW * (1.0 + np.abs(rhs))
    matrix = matrix[keep] / norms[keep, None]
    rhs = rhs[keep] / norms[keep]

    tightest: dict[tuple[float, ...], int] = {}
    for k, row in enumerate(np.round(matrix, DEDUP_DECIMALS)):
        key = tuple(row + 0.0)
        if key not in tightest or rhs[k] < rhs[tightest[key]]:
            tightest[key] = k
    order = sorted(tightest.values())
    return matrix[order].reshape(len(order), d), rhs[order]


def combine_pieces(pieces: list[ParametricPiece]) -> ParametricPiece:
    """Sum per-area pieces generated at the same θ; the region is the intersection."""
    if not pieces:
        raise ParametricError("cannot combine an empty list of pieces")
    d = pieces[0].dimension
    matrix, rhs = _normalize_region(
        np.vstack([np.zeros((0, d))] + [piece.region_matrix for piece in pieces]),
        np.concatenate([np.zeros(0)] + [piece.region_rhs for piece in pieces]),
    )
    return ParametricPiece(
        area=None,
        hessian=sum(piece.hessian for piece in pieces),
        linear=sum(piece.linear for piece in pieces),
        constant=sum(piece.constant for piece in pieces),
        true_hessian=sum(piece.true_hessian for piece in pieces),
        true_linear=sum(piece.true_linear for piece in pieces),
        true_constant=sum(piece.true_constant for piece in pieces),
        region_matrix=matrix,
        region_rhs=rhs,
        degenerate=any(piece.degenerate for piece in pieces),
        theta=pieces[0].theta.copy(),
        components=tuple(pieces),
    )
