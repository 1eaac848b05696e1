"""Bookkeeping of the areas and the coordinator during a run."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

# A signed basis direction ±e_p, stored as (p, ±1)
Direction = tuple[int, int]


def signed_basis(owned: np.ndarray) -> list[Direction]:
    """{e_p, −e_p} for every owned coordinate p, in that order."""
    return [(int(p), sign) for p in owned for sign in (1, -1)]


def direction_vector(direction: Direction, dimension: int) -> np.ndarray:
    coordinate, sign = direction
    vector = np.zeros(dimension)
    vector[coordinate] = float(sign)
    return vector


@dataclass
class AreaAgentState:
    """
    One area's round: directions still to explore, retired ones, and the
    gradients and coupling normals collected at its incumbent θ*ᵢ.

    `value` is Σⱼ𝒥ⱼ(θ*ᵢ) without the ℓ1 term, which depends on the current σ.
    """

    area: int
    owned: np.ndarray
    theta: np.ndarray
    value: float
    working: deque[Direction] = field(default_factory=deque)
    finished: list[Direction] = field(default_factory=list)
    gradients: list[np.ndarray] = field(default_factory=list)
    normals: list[np.ndarray] = field(default_factory=list)
    moves: int = 0
    sigma_changed: bool = False

    @classmethod
    def start(
        cls, area: int, owned: np.ndarray, theta: np.ndarray, value: float
    ) -> "AreaAgentState":
        owned = np.asarray(owned, dtype=int)
        return cls(
            area=area,
            owned=owned,
            theta=np.array(theta, dtype=float),
            value=value,
            working=deque(signed_basis(owned)),
        )

    @property
    def head(self) -> Direction:
        return self.working[0]

    def retire(self) -> None:
        """Move the head direction to the finished set."""
        self.finished.append(self.working.popleft())

    def refill(self) -> None:
        """Put every finished direction back to work."""
        self.working.extend(self.finished)
        self.finished.clear()

    def reset_bundle(self, gradient: np.ndarray, normals: np.ndarray) -> None:
        self.gradients = [gradient]
        self.normals = list(normals)

    def extend_bundle(self, gradient: np.ndarray, normals: np.ndarray) -> None:
        self.gradients.append(gradient)
        self.normals.extend(normals)


@dataclass
class CoordinatorState:
    """Areas still to optimize, the global incumbent and bundle, and the frame."""

    theta: np.ndarray
    value: float
    sigma: float
    order: list[int]
    working: deque[int] = field(default_factory=deque)
    finished: list[int] = field(default_factory=list)
    gradients: list[np.ndarray] = field(default_factory=list)
    normals: list[np.ndarray] = field(default_factory=list)
    rotation: np.ndarray = field(default_factory=lambda: np.eye(0))
    iteration: int = 0
    rounds: int = 0
    rotations: int = 0

    @classmethod
    def start(
        cls, theta: np.ndarray, value: float, sigma: float, order: list[int]
    ) -> "CoordinatorState":
        theta = np.array(theta, dtype=float)
        return cls(
            theta=theta,
            value=value,
            sigma=sigma,
            order=list(order),
            working=deque(order),
            rotation=np.eye(theta.size),
        )

    def next_area(self) -> int:
        """Pop the head of the working list into the finished list."""
        area = self.working.popleft()
        self.finished.append(area)
        self.rounds += 1
        return area

    def requeue(self) -> None:
        """𝔸_w ← 𝔸_w ∪ 𝔸_o after the incumbent moved."""
        for area in self.finished:
            if area not in self.working:
                self.working.append(area)
        self.finished.clear()

    def refill(self) -> None:
        """Every area back to work in cycle order."""
        self.working = deque(self.order)
        self.finished.clear()

    def original_theta(self, theta: np.ndarray | None = None) -> np.ndarray:
        """θ = Rᵀθ̃ for the incumbent (or any vector in the current frame)."""
        return self.rotation.T @ (self.theta if theta is None else theta)
