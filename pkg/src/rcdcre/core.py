"""The penalty-based rotated coordinate descent loop."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..grid.compact import CompactAreaProblem, CouplingSet
from ..methods.base import CoordinationMethod, MethodResult, method_registry
from ..methods.trace import ConvergenceTrace, TraceRecord
from ..parametric.penalty import PenalizedAreaProblem, bigM_reformulate
from ..parametric.piece import ParametricPiece, combine_pieces
from ..qp import SolveStatus, solve_qp
from ..utils.config import Tolerances
from ..utils.exceptions import ExperimentConfigError, PenaltyConfigurationError
from ..utils.logger import get_logger
from .config import AlgoConfig
from .explorer import AreaEvaluator, ProbeEvent, area_round, bundle_entry
from .rotation import build_rotation
from .state import AreaAgentState, CoordinatorState
from .subgradient import SubgradientBundle, subgradient_direction

if TYPE_CHECKING:
    from ..methods.settings import MethodSettings

logger = get_logger(__name__)

# Slack or coupling excess below this counts as zero when labelling stages
STAGE_TOL = 1e-7


@dataclass
class RcdcreResult:
    """Final boundary angles in the original frame, local solutions and the trace."""

    theta: np.ndarray
    objective: float
    local: list[np.ndarray]
    trace: ConvergenceTrace
    certified: bool
    rotation: np.ndarray
    sigma: float
    bundle: SubgradientBundle | None
    evaluations: int = 0

    @property
    def rotations(self) -> int:
        return self.trace.count("rotate")


def rotate_problem(
    problems: Sequence[PenalizedAreaProblem],
    coupling: CouplingSet,
    coordinator: CoordinatorState,
    rotation: np.ndarray,
) -> tuple[list[PenalizedAreaProblem], CouplingSet]:
    """
    Change to the frame θ̃' = Rθ̃.

    Problem and coupling coefficients are right-multiplied by Rᵀ; the
    incumbent, the cumulative rotation and the global bundle move with R, and
    every area goes back to work in cycle order.

    Returns:
        (rotated problems, rotated coupling set)
    """
    rotation = np.asarray(rotation, dtype=float)
    rotated = [problem.rotated(rotation) for problem in problems]
    coordinator.theta = rotation @ coordinator.theta
    coordinator.rotation = rotation @ coordinator.rotation
    coordinator.gradients = [rotation @ gradient for gradient in coordinator.gradients]
    coordinator.normals = [rotation @ normal for normal in coordinator.normals]
    coordinator.refill()
    coordinator.rotations += 1
    return rotated, coupling.rotated(rotation)


def _penalize(
    problems: Sequence[CompactAreaProblem | PenalizedAreaProblem], big_m: float | None
) -> list[PenalizedAreaProblem]:
    return [
        problem if isinstance(problem, PenalizedAreaProblem) else bigM_reformulate(problem, big_m)
        for problem in problems
    ]


def _stage(slack: float, violation: float) -> str:
    if slack > STAGE_TOL:
        return "penalized"
    if violation > STAGE_TOL:
        return "outside-coupling"
    return "feasible"


class _TraceWriter:
    """Turns probes and frame changes into trace records in the original frame."""

    def __init__(
        self,
        trace: ConvergenceTrace,
        problems: Sequence[PenalizedAreaProblem],
        coordinator: CoordinatorState,
    ) -> None:
        self.trace = trace
        self.problems = problems
        self.coordinator = coordinator

    def _slack(self, combined: ParametricPiece, theta: np.ndarray) -> float:
        total = 0.0
        for component in combined.components:
            slacks = self.problems[component.area].slacks(component.primal(theta))
            total += float(np.sum(np.maximum(slacks, 0.0)))
        return total

    def point(
        self,
        combined: ParametricPiece,
        coupling: CouplingSet,
        theta: np.ndarray,
        sigma: float,
        **fields,
    ) -> TraceRecord:
        violation = float(np.sum(coupling.violation(theta)))
        slack = self._slack(combined, theta)
        penalized = combined.value(theta) + sigma * violation
        return self.trace.add(
            penalized,
            self.coordinator.original_theta(theta),
            obj_true=combined.true_value(theta),
            obj_penalized=penalized,
            infeas_norm=slack + violation,
            rotations=self.coordinator.rotations,
            stage=_stage(slack, violation),
            sigma=sigma,
            degenerate=combined.degenerate,
            **fields,
        )

    def probe(self, event: ProbeEvent, coupling: CouplingSet) -> None:
        self.point(
            event.combined,
            coupling,
            event.theta,
            event.sigma,
            phase="coordinate" if event.accepted else "explore",
            area=event.area,
            stepsize=event.stepsize,
            accepted=event.accepted,
        )


def run(
    problems: Sequence[CompactAreaProblem | PenalizedAreaProblem],
    coupling: CouplingSet | None = None,
    config: AlgoConfig | None = None,
    start: np.ndarray | None = None,
    sink: Callable[[TraceRecord], None] | None = None,
    tolerances: Tolerances | None = None,
    reference_objective: float | None = None,
) -> RcdcreResult:
    """
    Distributed coordinate descent over the boundary angles, rotating the
    frame whenever every area is stuck away from a certified optimum.

    Hard area problems are big-M penalized first, so any start is allowed.
    Areas take turns in cycle order; an area whose round moved the incumbent
    (or raised σ) replaces the global bundle and sends the finished areas back
    to work, otherwise its bundle joins the global one. With no area left, the
    least-norm subgradient either certifies the incumbent or yields the
    direction the next rotation aligns with a coordinate axis.

    Args:
        problems: Area problems, hard or already penalized
        coupling: Coupling polyhedron, defaults to the areas' stacked rows
        config: Algorithm settings
        start: Initial θ, zero by default
        sink: Receives every trace record as it is written
        tolerances: Solver tolerances
        reference_objective: Centralized optimum for relative gaps

    Returns:
        RcdcreResult with θ in the original frame

    Raises:
        ExperimentConfigError: If the start does not match the boundary dimension
    """
    config = config or AlgoConfig()
    penalized = _penalize(problems, config.big_m)
    if coupling is None:
        coupling = CouplingSet.from_problems([problem.base for problem in penalized])
    dimension = coupling.dimension
    theta = np.zeros(dimension) if start is None else np.asarray(start, dtype=float).ravel()
    if theta.size != dimension:
        raise ExperimentConfigError(
            f"start has {theta.size} entries, the boundary vector has {dimension}"
        )
    order = config.order_for(len(penalized))
    trace = ConvergenceTrace("rcdcre", reference_objective=reference_objective, sink=sink)

    current = list(penalized)
    bundle: SubgradientBundle | None = None
    certified = False
    reason = "iteration cap"
    with AreaEvaluator(current, config.threads, tolerances) as evaluator:
        combined = combine_pieces(evaluator.evaluate(theta))
        coordinator = CoordinatorState.start(theta, combined.value(theta), config.sigma, order)
        gradient, normals = bundle_entry(combined, coupling, theta, config.sigma)
        coordinator.gradients, coordinator.normals = [gradient], list(normals)
        writer = _TraceWriter(trace, penalized, coordinator)
        writer.point(combined, coupling, theta, config.sigma, phase="explore")

        while coordinator.iteration < config.max_iterations:
            if not coordinator.working:
                bundle = subgradient_direction(
                    np.array(coordinator.gradients),
                    np.array(coordinator.normals).reshape(-1, dimension),
                    tolerances,
                )
                if bundle.certifies(config.optimal_tol):
                    certified = True
                    reason = "optimal"
                    break
                rotation = build_rotation(-bundle.direction)
                current, coupling = rotate_problem(current, coupling, coordinator, rotation)
                evaluator.set_problems(current)
                logger.info(
                    f"Rotation {coordinator.rotations} at ‖v‖ = {bundle.norm:.3e}, "
                    f"θ = {coordinator.original_theta().round(6).tolist()}"
                )
                trace.add(
                    coordinator.value
                    + coordinator.sigma * float(np.sum(coupling.violation(coordinator.theta))),
                    coordinator.original_theta(),
                    phase="rotate",
                    v_norm=bundle.norm,
                    rotations=coordinator.rotations,
                    sigma=coordinator.sigma,
                )
                continue

            area = coordinator.next_area()
            agent = AreaAgentState.start(
                area, penalized[area].base.owned, coordinator.theta, coordinator.value
            )
            area_round(
                agent,
                coordinator,
                evaluator,
                coupling,
                config,
                tolerances,
                on_probe=lambda event: writer.probe(event, coupling),
            )
            if agent.moves > 0 or agent.sigma_changed:
                coordinator.theta = agent.theta
                coordinator.value = agent.value
                coordinator.gradients = list(agent.gradients)
                coordinator.normals = list(agent.normals)
                coordinator.requeue()
            else:
                coordinator.gradients.extend(agent.gradients)
                coordinator.normals.extend(agent.normals)

        evaluations = evaluator.solves
    if not certified:
        logger.warning(
            f"RCDCRE stopped after {coordinator.iteration} probes without an optimality certificate"
        )

    theta_final = coordinator.original_theta()
    local, objective, penalized_total, slack = _dispatch(penalized, theta_final, tolerances)
    violation = float(np.sum(coupling.violation(coordinator.theta)))
    trace.finish(
        penalized_total + coordinator.sigma * violation,
        theta_final,
        reason,
        certified,
        obj_true=objective,
        obj_penalized=penalized_total + coordinator.sigma * violation,
        infeas_norm=slack + violation,
        v_norm=bundle.norm if bundle is not None else None,
        rotations=coordinator.rotations,
        stage=_stage(slack, violation),
        sigma=coordinator.sigma,
    )
    logger.info(
        f"RCDCRE {reason}: objective {objective:.6f} after {coordinator.iteration} probes "
        f"and {coordinator.rotations} rotations"
    )
    return RcdcreResult(
        theta=theta_final,
        objective=objective,
        local=local,
        trace=trace,
        certified=certified,
        rotation=coordinator.rotation,
        sigma=coordinator.sigma,
        bundle=bundle,
        evaluations=evaluations,
    )


def _dispatch(
    problems: Sequence[PenalizedAreaProblem], theta: np.ndarray, tolerances: Tolerances | None
) -> tuple[list[np.ndarray], float, float, float]:
    """Local solutions at θ, their true cost, their penalized cost and the total slack."""
    local: list[np.ndarray] = []
    objective = 0.0
    penalized = 0.0
    slack = 0.0
    for problem in problems:
        qp = problem.at(theta)
        solution = solve_qp(qp, tolerances)
        if solution.status is not SolveStatus.OPTIMAL:
            raise PenaltyConfigurationError(
                problem.index, f"final solve ended {solution.status.value}"
            )
        local.append(problem.local(solution.primal))
        objective += problem.true_objective(solution.primal)
        penalized += qp.objective(solution.primal)
        slack += float(np.sum(np.maximum(problem.slacks(solution.primal), 0.0)))
    return local, objective, penalized, slack


class RcdcreMethod(CoordinationMethod):
    """Rotated coordinate descent with critical region exploration."""

    name = "rcdcre"
    description = "Distributed BCD over critical regions with coordinate rotations"

    def run(
        self,
        problems: Sequence[CompactAreaProblem],
        start: np.ndarray,
        settings: "MethodSettings",
        sink: Callable[[TraceRecord], None] | None = None,
    ) -> MethodResult:
        result = run(
            problems,
            config=settings.algo,
            start=start,
            sink=sink,
            reference_objective=settings.reference_objective,
            tolerances=settings.tolerances,
        )
        return MethodResult(
            method=self.name,
            theta=result.theta,
            objective=result.objective,
            local=result.local,
            trace=result.trace,
            certified=result.certified,
            message=result.trace.termination,
            details={
                "rotations": result.rotations,
                "sigma": result.sigma,
                "evaluations": result.evaluations,
            },
        )


method_registry.register(RcdcreMethod())
