"""Coordinate probes, per-area parametric evaluation and one area's round."""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..grid import CouplingSet
from ..parametric import ParametricPiece, ParametricQp, combine_pieces, evaluate_at
from ..utils.config import Tolerances
from ..utils.exceptions import StepsizeViolationError
from ..utils.logger import get_logger
from .config import AlgoConfig
from .coordination import CoordinationResult, adapt_sigma, solve_l1_coordination
from .state import AreaAgentState, CoordinatorState, Direction, direction_vector

logger = get_logger(__name__)

# Cached pieces are reused only strictly inside their region
CACHE_MARGIN = 1e-9
CACHE_SIZE = 16


def bcd_explore(
    theta: np.ndarray, direction: Direction | np.ndarray, stepsize: float
) -> np.ndarray:
    """θˢ = θ*ᵢ − ε·direction."""
    theta = np.asarray(theta, dtype=float)
    if isinstance(direction, tuple):
        direction = direction_vector(direction, theta.size)
    return theta - stepsize * np.asarray(direction, dtype=float)


class AreaEvaluator:
    """
    Evaluates every area at a parameter, optionally on a thread pool.

    Results come back in area order whatever the thread count. A piece found
    earlier is reused when the parameter lies strictly inside its region.
    """

    def __init__(
        self,
        problems: Sequence[ParametricQp],
        threads: int = 1,
        tolerances: Tolerances | None = None,
    ) -> None:
        self.threads = max(1, threads)
        self.tolerances = tolerances
        self._executor: ThreadPoolExecutor | None = None
        self.solves = 0
        self.reused = 0
        self.set_problems(problems)

    def set_problems(self, problems: Sequence[ParametricQp]) -> None:
        """Replace the problems (after a rotation) and forget cached pieces."""
        self.problems = list(problems)
        self._cache: list[list[ParametricPiece]] = [[] for _ in self.problems]

    def _evaluate_area(self, index: int, theta: np.ndarray) -> ParametricPiece:
        for piece in self._cache[index]:
            if piece.contains(theta, tol=-CACHE_MARGIN):
                self.reused += 1
                return piece
        _, piece = evaluate_at(self.problems[index], theta, self.tolerances)
        self.solves += 1
        cache = self._cache[index]
        cache.insert(0, piece)
        del cache[CACHE_SIZE:]
        return piece

    def evaluate(self, theta: np.ndarray) -> list[ParametricPiece]:
        theta = np.asarray(theta, dtype=float)
        indices = range(len(self.problems))
        if self.threads == 1 or len(self.problems) == 1:
            return [self._evaluate_area(index, theta) for index in indices]
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.threads)
        return list(self._executor.map(lambda index: self._evaluate_area(index, theta), indices))

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "AreaEvaluator":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


@dataclass
class ProbeEvent:
    """What one coordination solve inside a round produced."""

    area: int
    accepted: bool
    theta: np.ndarray
    pieces: list[ParametricPiece]
    combined: ParametricPiece
    result: CoordinationResult | None
    stepsize: float
    sigma: float


def bundle_entry(
    piece: ParametricPiece, coupling: CouplingSet, theta: np.ndarray, sigma: float
) -> tuple[np.ndarray, np.ndarray]:
    """
    Gradient of Σ𝒥 + σ·hinge at θ on this piece, and the coupling rows active at θ.

    Strictly violated rows contribute σ·Dₖ to the gradient; rows holding with
    equality enter as normal-cone generators.
    """
    gradient = piece.gradient(theta)
    residual = coupling.residual(theta)
    scale = 1e-8 * (1.0 + np.abs(coupling.rhs))
    violated = residual > scale
    if np.any(violated):
        gradient = gradient + sigma * coupling.matrix[violated].sum(axis=0)
    active = np.abs(residual) <= scale
    return gradient, coupling.matrix[active]


def _probe(
    agent: AreaAgentState,
    direction: Direction,
    evaluator: AreaEvaluator,
    coupling: CouplingSet,
    sigma: float,
    config: AlgoConfig,
    tolerances: Tolerances | None,
) -> tuple[list[ParametricPiece], ParametricPiece, CoordinationResult, float] | None:
    """
    Explore one direction, halving the stepsize while the probe skips past the
    regions adjacent to θ*ᵢ.
    """
    step = config.stepsize
    for _ in range(config.max_halvings + 1):
        theta_s = bcd_explore(agent.theta, direction, step)
        pieces = evaluator.evaluate(theta_s)
        combined = combine_pieces(pieces)
        if combined.contains(agent.theta, tol=config.containment_tol):
            try:
                result = solve_l1_coordination(
                    combined, coupling, agent.theta, agent.owned, sigma, tolerances
                )
                return pieces, combined, result, step
            except StepsizeViolationError as e:
                logger.debug(f"Area {agent.area}: {e}")
        step *= 0.5
        logger.warning(
            f"Area {agent.area}: probe along {direction} left the adjacent regions, "
            f"stepsize halved to {step:.3e}"
        )
    return None


def area_round(
    agent: AreaAgentState,
    coordinator: CoordinatorState,
    evaluator: AreaEvaluator,
    coupling: CouplingSet,
    config: AlgoConfig,
    tolerances: Tolerances | None = None,
    on_probe: Callable[[ProbeEvent], None] | None = None,
) -> AreaAgentState:
    """
    Run area i's coordinate descent until every owned direction is retired.

    A probe is accepted when the coordination minimizer moves at least ε away
    from θ*ᵢ and strictly lowers Σ𝒥 + σ·hinge; then every direction returns to
    work and the bundle restarts from the new gradient. Otherwise the head
    direction retires and its gradient joins the bundle. A change of σ refills
    the directions and restarts the bundle as well.

    Args:
        agent: State of the optimizing area
        coordinator: Global state (σ and the probe counter are updated)
        evaluator: Evaluates all areas at a probe
        coupling: Coupling polyhedron in the current frame
        config: Algorithm settings
        tolerances: Solver tolerances
        on_probe: Called after every probe

    Returns:
        The updated agent
    """
    while agent.working:
        if coordinator.iteration >= config.max_iterations:
            logger.warning(f"Area {agent.area}: iteration cap {config.max_iterations} reached")
            break
        direction = agent.head
        sigma = coordinator.sigma
        outcome = _probe(agent, direction, evaluator, coupling, sigma, config, tolerances)
        coordinator.iteration += 1
        if outcome is None:
            logger.warning(f"Area {agent.area}: direction {direction} retired without a probe")
            agent.retire()
            continue
        pieces, combined, result, step = outcome

        current = agent.value + sigma * float(np.sum(coupling.violation(agent.theta)))
        moved = float(np.linalg.norm(result.theta - agent.theta))
        accepted = (
            moved >= config.stepsize and result.objective < current - 1e-10 * (1.0 + abs(current))
        )
        if accepted:
            agent.theta = result.theta
            agent.value = combined.value(result.theta)
            agent.moves += 1
            agent.refill()
            logger.info(
                f"Area {agent.area}: moved {moved:.3e} along {direction}, "
                f"objective {current:.6f} -> {result.objective:.6f}"
            )
        else:
            agent.retire()

        new_sigma = adapt_sigma(result.duals, sigma, config)
        if new_sigma != sigma:
            coordinator.sigma = new_sigma
            agent.sigma_changed = True
            agent.refill()
        gradient, normals = bundle_entry(combined, coupling, agent.theta, coordinator.sigma)
        if accepted or new_sigma != sigma:
            agent.reset_bundle(gradient, normals)
        else:
            agent.extend_bundle(gradient, normals)

        if on_probe is not None:
            on_probe(
                ProbeEvent(
                    area=agent.area,
                    accepted=accepted,
                    theta=agent.theta.copy(),
                    pieces=pieces,
                    combined=combined,
                    result=result,
                    stepsize=step,
                    sigma=coordinator.sigma,
                )
            )
    return agent
