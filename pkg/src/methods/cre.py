"""Critical region exploration with a central coordinator over every coordinate."""

from collections.abc import Callable, Sequence
from typing import TYPE_CHECKING

import numpy as np

from ..grid.compact import CompactAreaProblem, CouplingSet
from ..parametric.piece import ParametricPiece, combine_pieces
from ..qp import solve_qp
from ..rcdcre.config import AlgoConfig
from ..rcdcre.coordination import solve_hard_coordination
from ..rcdcre.explorer import AreaEvaluator
from ..rcdcre.subgradient import SubgradientBundle, subgradient_direction
from ..utils.config import Tolerances
from ..utils.exceptions import InfeasibleParameterError, StepsizeViolationError
from ..utils.logger import get_logger
from .base import CoordinationMethod, MethodResult, method_registry
from .centralized import find_feasible_theta
from .trace import ConvergenceTrace, TraceRecord

if TYPE_CHECKING:
    from .settings import MethodSettings

logger = get_logger(__name__)


class _Explorer:
    """Incumbent, its combined piece and the gradients collected around it."""

    def __init__(
        self,
        evaluator: AreaEvaluator,
        coupling: CouplingSet,
        config: AlgoConfig,
        tolerances: Tolerances | None,
    ) -> None:
        self.evaluator = evaluator
        self.coupling = coupling
        self.config = config
        self.tolerances = tolerances
        self.theta = np.zeros(coupling.dimension)
        self.piece: ParametricPiece | None = None
        self.value = float("nan")
        self.gradients: list[np.ndarray] = []
        self.keys: set[tuple] = set()

    def move_to(self, theta: np.ndarray) -> None:
        self.theta = np.asarray(theta, dtype=float)
        self.piece = combine_pieces(self.evaluator.evaluate(self.theta))
        self.value = self.piece.value(self.theta)
        self.gradients = [self.piece.gradient(self.theta)]
        self.keys = {self.piece.key}

    def improves(self, objective: float) -> bool:
        return objective < self.value - 1e-10 * (1.0 + abs(self.value))

    def bundle(self) -> SubgradientBundle:
        normals = self.coupling.matrix[self.coupling.active_rows(self.theta)]
        return subgradient_direction(np.array(self.gradients), normals, self.tolerances)

    def probe(self, direction: np.ndarray) -> tuple[ParametricPiece, np.ndarray | None] | None:
        """
        Step against `direction` into the next region, halving the step until
        the incumbent lies on the new region's closure.

        Returns:
            (piece at the probe, improving θ or None), or None if every step failed
        """
        unit = direction / np.linalg.norm(direction)
        step = self.config.stepsize
        for _ in range(self.config.max_halvings + 1):
            try:
                piece = combine_pieces(self.evaluator.evaluate(self.theta - step * unit))
                fresh = piece.key not in self.keys
                if fresh and piece.contains(self.theta, tol=self.config.containment_tol):
                    result = solve_hard_coordination(
                        piece, self.coupling, self.theta, tolerances=self.tolerances
                    )
                    return piece, result.theta if self.improves(result.objective) else None
            except (InfeasibleParameterError, StepsizeViolationError) as e:
                logger.debug(f"CRE probe at step {step:.3e}: {e}")
            step *= 0.5
        return None


def run_cre(
    problems: Sequence[CompactAreaProblem],
    coupling: CouplingSet | None = None,
    config: AlgoConfig | None = None,
    start: np.ndarray | None = None,
    sink: Callable[[TraceRecord], None] | None = None,
    tolerances: Tolerances | None = None,
    reference_objective: float | None = None,
) -> MethodResult:
    """
    Alternate local evaluation and a central coordination solve over ∩CR ∩ Θ.

    The coordinator controls all of θ. When the minimizer over the current
    region stops moving, the least-norm subgradient of the collected pieces
    and the active coupling rows either certifies θ or gives the direction of
    the next probe. There is no penalty: the start is moved to the nearest
    θ feasible for every area, and a probe that leaves the feasible
    parameters is retried with a shorter step.

    Args:
        problems: Hard area problems
        coupling: Coupling polyhedron, defaults to the areas' stacked rows
        config: Stepsize, optimality tolerance and caps
        start: Requested start, zero by default
        sink: Receives every trace record as it is written
        tolerances: Solver tolerances
        reference_objective: Centralized optimum for relative gaps

    Returns:
        MethodResult whose records carry the true objective

    Raises:
        InfeasibleParameterError: If the incumbent itself is infeasible for an area
    """
    config = config or AlgoConfig()
    hard = [getattr(problem, "base", problem) for problem in problems]
    if coupling is None:
        coupling = CouplingSet.from_problems(hard)
    trace = ConvergenceTrace("cre", reference_objective=reference_objective, sink=sink)
    theta = find_feasible_theta(hard, coupling, start, tolerances)

    certified = False
    reason = "iteration cap"
    bundle: SubgradientBundle | None = None
    with AreaEvaluator(hard, config.threads, tolerances) as evaluator:
        explorer = _Explorer(evaluator, coupling, config, tolerances)
        explorer.move_to(theta)
        trace.add(explorer.value, explorer.theta, obj_true=explorer.value, stage="feasible")

        iteration = 0
        while iteration < config.max_iterations:
            iteration += 1
            result = solve_hard_coordination(
                explorer.piece, coupling, explorer.theta, tolerances=tolerances
            )
            if explorer.improves(result.objective):
                explorer.move_to(result.theta)
                trace.add(
                    explorer.value,
                    explorer.theta,
                    phase="coordinate",
                    obj_true=explorer.value,
                    stage="feasible",
                )
                continue

            bundle = explorer.bundle()
            if bundle.certifies(config.optimal_tol):
                certified = True
                reason = "optimal"
                break
            outcome = explorer.probe(bundle.direction)
            if outcome is None:
                logger.warning(f"CRE: no probe along ‖v‖ = {bundle.norm:.3e} reached a new region")
                reason = "stalled"
                break
            piece, improved = outcome
            trace.add(
                explorer.value,
                explorer.theta,
                phase="explore",
                obj_true=explorer.value,
                v_norm=bundle.norm,
                stage="feasible",
            )
            if improved is not None:
                explorer.move_to(improved)
                trace.add(
                    explorer.value,
                    explorer.theta,
                    phase="coordinate",
                    obj_true=explorer.value,
                    stage="feasible",
                )
            else:
                explorer.gradients.append(piece.gradient(explorer.theta))
                explorer.keys.add(piece.key)

    final = local_solutions(hard, explorer.theta, tolerances)
    trace.finish(
        explorer.value,
        explorer.theta,
        reason,
        certified,
        obj_true=explorer.value,
        v_norm=bundle.norm if bundle is not None else None,
        stage="feasible",
    )
    logger.info(f"CRE {reason}: objective {explorer.value:.6f} after {iteration} iterations")
    return MethodResult(
        method="cre",
        theta=explorer.theta.copy(),
        objective=explorer.value,
        local=final,
        trace=trace,
        certified=certified,
        message=reason,
    )


def local_solutions(
    problems: Sequence[CompactAreaProblem], theta: np.ndarray, tolerances: Tolerances | None
) -> list[np.ndarray]:
    """Each area's local solution with θ fixed."""
    local = []
    for problem in problems:
        solution = solve_qp(problem.at(theta), tolerances)
        if not solution.optimal:
            raise InfeasibleParameterError(problem.index)
        local.append(solution.primal)
    return local


class CreMethod(CoordinationMethod):
    """Critical region exploration coordinated centrally."""

    name = "cre"
    description = "Central coordinator over all boundary angles, hard coupling"

    def run(
        self,
        problems: Sequence[CompactAreaProblem],
        start: np.ndarray,
        settings: "MethodSettings",
        sink: Callable[[TraceRecord], None] | None = None,
    ) -> MethodResult:
        return run_cre(
            problems,
            config=settings.algo,
            start=start,
            sink=sink,
            reference_objective=settings.reference_objective,
            tolerances=settings.tolerances,
        )


method_registry.register(CreMethod())
