"""Compact per-area parametric form and the full single-problem DC-OPF."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..qp import QpProblem
from ..utils.exceptions import SingularNetworkError
from ..utils.logger import get_logger
from .dc_model import DcModel

logger = get_logger(__name__)

# Conditioning above which the internal balance block counts as singular
MAX_CONDITION = 1e12


@dataclass
class AngleRecovery:
    """Eliminated internal angles as an affine map δ = P g + q + S θ."""

    buses: np.ndarray
    gen_map: np.ndarray
    offset: np.ndarray
    theta_map: np.ndarray

    def angles(self, dispatch: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return self.gen_map @ dispatch + self.offset + self.theta_map @ theta


@dataclass
class CompactAreaProblem:
    """
    One area's problem, parametric in the global boundary angles θ:

        minimize ½xᵀHx + fᵀx
        subject to  A x ≤ b + C θ,   E x = e + F θ

    plus the area's share of the coupling polyhedron D θ ≤ r. C, F and D
    always span the full θ vector; columns of coordinates the area never
    touches are zero.
    """

    index: int
    label: int
    hessian: np.ndarray
    linear_cost: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    ineq_coupling: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    eq_coupling: np.ndarray
    coupling_matrix: np.ndarray
    coupling_rhs: np.ndarray
    owned: np.ndarray
    n_gen: int
    neighbors: tuple[int, ...] = ()
    angle_buses: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    recovery: AngleRecovery | None = None
    ineq_labels: list[str] = field(default_factory=list)
    eq_labels: list[str] = field(default_factory=list)
    coupling_labels: list[str] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return self.linear_cost.size

    @property
    def theta_dim(self) -> int:
        return self.ineq_coupling.shape[1]

    @property
    def n_ineq(self) -> int:
        return self.ineq_rhs.size

    @property
    def n_eq(self) -> int:
        return self.eq_rhs.size

    def stacked_inequalities(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All local rows as A x ≤ b + C θ, equalities written as two inequalities."""
        matrix = np.vstack([self.ineq_matrix, self.eq_matrix, -self.eq_matrix])
        rhs = np.concatenate([self.ineq_rhs, self.eq_rhs, -self.eq_rhs])
        coupling = np.vstack([self.ineq_coupling, self.eq_coupling, -self.eq_coupling])
        return matrix, rhs, coupling

    def at(self, theta: np.ndarray) -> QpProblem:
        """The local QP with θ fixed."""
        theta = np.asarray(theta, dtype=float)
        return QpProblem(
            hessian=self.hessian,
            linear_cost=self.linear_cost,
            ineq_matrix=self.ineq_matrix,
            ineq_rhs=self.ineq_rhs + self.ineq_coupling @ theta,
            eq_matrix=self.eq_matrix,
            eq_rhs=self.eq_rhs + self.eq_coupling @ theta,
        )

    @property
    def true_hessian(self) -> np.ndarray:
        return self.hessian

    @property
    def true_linear_cost(self) -> np.ndarray:
        return self.linear_cost

    def true_objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.hessian @ x + self.linear_cost @ x)

    def dispatch(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[: self.n_gen]

    def violations(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Positive part of every inequality residual followed by |equality residual|."""
        ineq = self.ineq_matrix @ x - self.ineq_rhs - self.ineq_coupling @ theta
        eq = self.eq_matrix @ x - self.eq_rhs - self.eq_coupling @ theta
        return np.concatenate([np.maximum(ineq, 0.0), np.abs(eq)])

    def is_feasible(self, x: np.ndarray, theta: np.ndarray, tol: float = 1e-8) -> bool:
        violations = self.violations(x, theta)
        return bool(np.all(violations <= tol * (1.0 + np.abs(self._row_rhs(theta)))))

    def _row_rhs(self, theta: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [self.ineq_rhs + self.ineq_coupling @ theta, self.eq_rhs + self.eq_coupling @ theta]
        )

    def rotated(self, rotation: np.ndarray) -> "CompactAreaProblem":
        """Coefficients for the rotated parameter θ̃ = Rθ (C̃ = CRᵀ, F̃ = FRᵀ, D̃ = DRᵀ)."""
        rotation = np.asarray(rotation, dtype=float)
        return replace(
            self,
            ineq_coupling=self.ineq_coupling @ rotation.T,
            eq_coupling=self.eq_coupling @ rotation.T,
            coupling_matrix=self.coupling_matrix @ rotation.T,
        )


@dataclass
class CouplingSet:
    """The stacked coupling polyhedron D θ ≤ r with the owning area of each row."""

    matrix: np.ndarray
    rhs: np.ndarray
    owner: np.ndarray
    labels: list[str] = field(default_factory=list)

    @classmethod
    def from_problems(cls, problems: list[CompactAreaProblem]) -> "CouplingSet":
        dim = problems[0].theta_dim if problems else 0
        matrix = np.vstack([np.zeros((0, dim))] + [p.coupling_matrix for p in problems])
        rhs = np.concatenate([np.zeros(0)] + [p.coupling_rhs for p in problems])
        owner = np.concatenate(
            [np.zeros(0, dtype=int)]
            + [np.full(p.coupling_rhs.size, p.index, dtype=int) for p in problems]
        )
        labels = [label for p in problems for label in p.coupling_labels]
        return cls(matrix=matrix, rhs=rhs, owner=owner, labels=labels)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    def rows_of(self, area: int) -> np.ndarray:
        return np.flatnonzero(self.owner == area)

    def residual(self, theta: np.ndarray) -> np.ndarray:
        return self.matrix @ theta - self.rhs

    def violation(self, theta: np.ndarray) -> np.ndarray:
        return np.maximum(self.residual(theta), 0.0)

    def contains(self, theta: np.ndarray, tol: float = 1e-8) -> bool:
        return bool(np.all(self.residual(theta) <= tol * (1.0 + np.abs(self.rhs))))

    def active_rows(self, theta: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        return np.flatnonzero(np.abs(self.residual(theta)) <= tol * (1.0 + np.abs(self.rhs)))

    def rotated(self, rotation: np.ndarray) -> "CouplingSet":
        return replace(self, matrix=self.matrix @ np.asarray(rotation, dtype=float).T)


class _RowBuilder:
    """Collects rows a_x·x ≤ rhs + c·θ (or =) over x = [g; δ_I']."""

    def __init__(self, n_vars: int, theta_dim: int) -> None:
        self.n_vars = n_vars
        self.theta_dim = theta_dim
        self.matrix: list[np.ndarray] = []
        self.rhs: list[float] = []
        self.coupling: list[np.ndarray] = []
        self.labels: list[str] = []

    def add(self, row: np.ndarray, rhs: float, coupling: np.ndarray, label: str) -> None:
        self.matrix.append(row)
        self.rhs.append(rhs)
        self.coupling.append(coupling)
        self.labels.append(label)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.matrix:
            return (
                np.zeros((0, self.n_vars)),
                np.zeros(0),
                np.zeros((0, self.theta_dim)),
            )
        return np.array(self.matrix), np.array(self.rhs), np.array(self.coupling)


def reduce_to_compact(
    model: DcModel, eliminate_internal_angles: bool = False
) -> list[CompactAreaProblem]:
    """
    Write each area's part of the DC-OPF in compact parametric form.

    Variables are x = [g; δ] with δ the area's internal angles (the reference,
    if it lies in the area, is fixed at zero and not a variable). Local rows are
    the balance equalities of every area bus, internal branch flows, generator
    limits and internal angle limits. Each area's coupling rows are the flows
    of its boundary branches and the angle limits of the θ coordinates it owns.

    With `eliminate_internal_angles`, δ is solved from the internal balance
    rows and substituted into every other row, leaving x = g.

    Raises:
        SingularNetworkError: If an area's internal balance block is singular
    """
    theta_index = model.theta_index()
    problems = [_build_area(model, i, theta_index) for i in range(len(model.areas))]
    if eliminate_internal_angles:
        problems = [_eliminate_angles(model, problem) for problem in problems]
    logger.debug(
        f"Compact form: {len(problems)} areas, θ dimension {model.theta_dim}, "
        f"variables {[p.n_vars for p in problems]}"
    )
    return problems


def _build_area(model: DcModel, i: int, theta_index: dict[int, int]) -> CompactAreaProblem:
    area = model.areas[i]
    base = model.base_mva
    d = model.theta_dim
    gens = area.generators
    n_g = gens.size
    angle_buses = area.internal[area.internal != model.reference]
    angle_col = {int(bus): n_g + k for k, bus in enumerate(angle_buses)}
    n_vars = n_g + angle_buses.size

    def split(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bus-angle coefficients → (x part, θ part)."""
        row = np.zeros(n_vars)
        coupling = np.zeros(d)
        for bus in np.flatnonzero(weights):
            if int(bus) in angle_col:
                row[angle_col[int(bus)]] = weights[bus]
            elif int(bus) in theta_index:
                coupling[theta_index[int(bus)]] = weights[bus]
            elif bus != model.reference:
                raise SingularNetworkError(
                    f"area {area.label}: bus {model.bus_ids[bus]} reached outside the area"
                )
        return row, coupling

    gen_at = {int(bus): [] for bus in area.buses}
    for k, g in enumerate(gens):
        gen_at[int(model.gen_bus[g])].append(k)

    eq = _RowBuilder(n_vars, d)
    for bus in np.concatenate([area.internal, area.boundary]):
        row, coupling = split(base * model.susceptance[bus])
        row[gen_at[int(bus)]] = -1.0
        eq.add(row, -model.load_mw[bus], -coupling, f"balance bus {model.bus_ids[bus]}")

    ineq = _RowBuilder(n_vars, d)
    for line in area.internal_branches:
        row, coupling = split(base * model.flow_matrix[line])
        label = _branch_label(model, line)
        ineq.add(row, model.branch_limits[line], -coupling, f"flow+ {label}")
        ineq.add(-row, model.branch_limits[line], coupling, f"flow- {label}")
    for k, g in enumerate(gens):
        unit = np.zeros(n_vars)
        unit[k] = 1.0
        ineq.add(unit, model.gen_pmax[g], np.zeros(d), f"pmax gen {g}")
        ineq.add(-unit, -model.gen_pmin[g], np.zeros(d), f"pmin gen {g}")
    for bus in angle_buses:
        unit = np.zeros(n_vars)
        unit[angle_col[int(bus)]] = 1.0
        bus_id = model.bus_ids[bus]
        ineq.add(unit, model.angle_max[bus], np.zeros(d), f"angle+ bus {bus_id}")
        ineq.add(-unit, -model.angle_min[bus], np.zeros(d), f"angle- bus {bus_id}")

    coupling_rows = _RowBuilder(d, d)
    for line in area.boundary_branches:
        _, weights = split(base * model.flow_matrix[line])
        label = _branch_label(model, line)
        coupling_rows.add(weights, model.branch_limits[line], np.zeros(d), f"tie+ {label}")
        coupling_rows.add(-weights, model.branch_limits[line], np.zeros(d), f"tie- {label}")
    for p in area.owned:
        bus = model.theta_buses[p]
        unit = np.zeros(d)
        unit[p] = 1.0
        bus_id = model.bus_ids[bus]
        coupling_rows.add(unit, model.angle_max[bus], np.zeros(d), f"theta+ bus {bus_id}")
        coupling_rows.add(-unit, -model.angle_min[bus], np.zeros(d), f"theta- bus {bus_id}")

    hessian = np.zeros((n_vars, n_vars))
    hessian[np.arange(n_g), np.arange(n_g)] = model.gen_q[gens]
    linear_cost = np.zeros(n_vars)
    linear_cost[:n_g] = model.gen_c[gens]

    A, b, C = ineq.arrays()
    E, e, F = eq.arrays()
    D, r, _ = coupling_rows.arrays()
    return CompactAreaProblem(
        index=i,
        label=area.label,
        hessian=hessian,
        linear_cost=linear_cost,
        ineq_matrix=A,
        ineq_rhs=b,
        ineq_coupling=C,
        eq_matrix=E,
        eq_rhs=e,
        eq_coupling=F,
        coupling_matrix=D,
        coupling_rhs=r,
        owned=area.owned,
        n_gen=n_g,
        neighbors=area.neighbors,
        angle_buses=angle_buses,
        ineq_labels=ineq.labels,
        eq_labels=eq.labels,
        coupling_labels=coupling_rows.labels,
    )


def _eliminate_angles(model: DcModel, problem: CompactAreaProblem) -> CompactAreaProblem:
    n_g = problem.n_gen
    n_delta = problem.angle_buses.size
    if n_delta == 0:
        return problem

    # The first rows of E are the internal balances; drop those of the angle buses.
    internal = list(model.areas[problem.index].internal)
    eliminated = np.array([internal.index(bus) for bus in problem.angle_buses], dtype=int)
    kept = np.setdiff1d(np.arange(problem.n_eq), eliminated)

    E = problem.eq_matrix[eliminated]
    block = E[:, n_g:]
    if np.linalg.cond(block) > MAX_CONDITION:
        raise SingularNetworkError(f"internal balance block of area {problem.label}")
    # −inc·g + W δ = e + F θ  ⇒  δ = W⁻¹(inc·g + e + F θ)
    gen_map = np.linalg.solve(block, -E[:, :n_g])
    offset = np.linalg.solve(block, problem.eq_rhs[eliminated])
    theta_map = np.linalg.solve(block, problem.eq_coupling[eliminated])

    def substitute(
        matrix: np.ndarray, rhs: np.ndarray, coupling: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        on_delta = matrix[:, n_g:]
        return (
            matrix[:, :n_g] + on_delta @ gen_map,
            rhs - on_delta @ offset,
            coupling - on_delta @ theta_map,
        )

    A, b, C = substitute(problem.ineq_matrix, problem.ineq_rhs, problem.ineq_coupling)
    E_kept, e_kept, F_kept = substitute(
        problem.eq_matrix[kept], problem.eq_rhs[kept], problem.eq_coupling[kept]
    )
    return replace(
        problem,
        hessian=problem.hessian[:n_g, :n_g],
        linear_cost=problem.linear_cost[:n_g],
        ineq_matrix=A,
        ineq_rhs=b,
        ineq_coupling=C,
        eq_matrix=E_kept,
        eq_rhs=e_kept,
        eq_coupling=F_kept,
        angle_buses=np.zeros(0, dtype=int),
        recovery=AngleRecovery(
            buses=problem.angle_buses,
            gen_map=gen_map,
            offset=offset,
            theta_map=theta_map,
        ),
        eq_labels=[problem.eq_labels[k] for k in kept],
    )


def _branch_label(model: DcModel, line: int) -> str:
    u, v = model.branch_ends[line]
    return f"branch {line} ({model.bus_ids[u]}-{model.bus_ids[v]})"


@dataclass
class FullOpf:
    """The whole DC-OPF as one QP over x = [g; δ without the reference]."""

    problem: QpProblem
    n_gen: int
    angle_buses: np.ndarray
    n_bus: int

    def bus_angles(self, x: np.ndarray) -> np.ndarray:
        angles = np.zeros(self.n_bus)
        angles[self.angle_buses] = x[self.n_gen :]
        return angles

    def violations(self, x: np.ndarray) -> np.ndarray:
        """Positive part of every inequality residual followed by |equality residual|."""
        problem = self.problem
        ineq = problem.ineq_matrix @ x - problem.ineq_rhs
        eq = problem.eq_matrix @ x - problem.eq_rhs
        return np.concatenate([np.maximum(ineq, 0.0), np.abs(eq)])


def build_full_opf(model: DcModel) -> FullOpf:
    """
    Assemble the single-problem DC-OPF: all balances, all branch flows,
    generator limits and angle limits of every non-reference bus.
    """
    base = model.base_mva
    n_g = model.gen_bus.size
    angle_buses = np.array([k for k in range(model.n_bus) if k != model.reference], dtype=int)
    n_vars = n_g + angle_buses.size

    incidence = np.zeros((model.n_bus, n_g))
    incidence[model.gen_bus, np.arange(n_g)] = 1.0
    eq_matrix = np.hstack([-incidence, base * model.susceptance[:, angle_buses]])
    eq_rhs = -model.load_mw

    flows = base * model.flow_matrix[:, angle_buses]
    n_branch = flows.shape[0]
    zeros_g = np.zeros((n_branch, n_g))
    eye_g = np.eye(n_g)
    eye_a = np.eye(angle_buses.size)
    ineq_matrix = np.vstack(
        [
            np.hstack([zeros_g, flows]),
            np.hstack([zeros_g, -flows]),
            np.hstack([eye_g, np.zeros((n_g, angle_buses.size))]),
            np.hstack([-eye_g, np.zeros((n_g, angle_buses.size))]),
            np.hstack([np.zeros((angle_buses.size, n_g)), eye_a]),
            np.hstack([np.zeros((angle_buses.size, n_g)), -eye_a]),
        ]
    )
    ineq_rhs = np.concatenate(
        [
            model.branch_limits,
            model.branch_limits,
            model.gen_pmax,
            -model.gen_pmin,
            model.angle_max[angle_buses],
            -model.angle_min[angle_buses],
        ]
    )

    hessian = np.zeros((n_vars, n_vars))
    hessian[np.arange(n_g), np.arange(n_g)] = model.gen_q
    linear_cost = np.concatenate([model.gen_c, np.zeros(angle_buses.size)])
    problem = QpProblem(hessian, linear_cost, ineq_matrix, ineq_rhs, eq_matrix, eq_rhs)
    return FullOpf(problem=problem, n_gen=n_g, angle_buses=angle_buses, n_bus=model.n_bus)


def area_problem(
    index: int,
    hessian: np.ndarray,
    linear_cost: np.ndarray,
    theta_dim: int,
    *,
    ineq: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    eq: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    coupling: tuple[np.ndarray, np.ndarray] | None = None,
    owned: list[int] | None = None,
) -> CompactAreaProblem:
    """
    Build a CompactAreaProblem from raw blocks, for problems that do not come
    from a network. Every variable counts as a generator output.

    Args:
        index: Area index
        hessian: Local Hessian
        linear_cost: Local linear cost
        theta_dim: Global boundary dimension
        ineq: (A, b, C) with A x ≤ b + C θ
        eq: (E, e, F) with E x = e + F θ
        coupling: (D, r) rows of the area's coupling polyhedron
        owned: θ coordinates the area controls
    """
    linear_cost = np.atleast_1d(np.asarray(linear_cost, dtype=float))
    n = linear_cost.size

    def blocks(data):
        if data is None:
            return np.zeros((0, n)), np.zeros(0), np.zeros((0, theta_dim))
        matrix, rhs, theta_part = data
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        return (
            np.asarray(matrix, dtype=float).reshape(rhs.size, n),
            rhs,
            np.asarray(theta_part, dtype=float).reshape(rhs.size, theta_dim),
        )

    A, b, C = blocks(ineq)
    E, e, F = blocks(eq)
    if coupling is None:
        D, r = np.zeros((0, theta_dim)), np.zeros(0)
    else:
        r = np.atleast_1d(np.asarray(coupling[1], dtype=float))
        D = np.asarray(coupling[0], dtype=float).reshape(r.size, theta_dim)
    return CompactAreaProblem(
        index=index,
        label=index + 1,
        hessian=np.asarray(hessian, dtype=float).reshape(n, n),
        linear_cost=linear_cost,
        ineq_matrix=A,
        ineq_rhs=b,
        ineq_coupling=C,
        eq_matrix=E,
        eq_rhs=e,
        eq_coupling=F,
        coupling_matrix=D,
        coupling_rhs=r,
        owned=np.array(owned or [], dtype=int),
        n_gen=n,
        ineq_labels=[f"row {k}" for k in range(b.size)],
        eq_labels=[f"eq {k}" for k in range(e.size)],
        coupling_labels=[f"coupling {k}" for k in range(r.size)],
    )
