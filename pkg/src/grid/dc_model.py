"""DC network model: susceptance and flow matrices partitioned by area."""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..utils.exceptions import SingularNetworkError
from ..utils.logger import get_logger
from .case import NetworkCase

logger = get_logger(__name__)


@dataclass
class AreaBlocks:
    """
    Index sets of one area, all positions into the model's bus/branch/generator arrays.

    `boundary_branches` are the branches whose flow depends only on boundary angles
    and that this area polices: its tie-lines by from-bus, plus internal branches
    joining two of its own boundary buses.
    """

    index: int
    label: int
    buses: np.ndarray
    internal: np.ndarray
    boundary: np.ndarray
    generators: np.ndarray
    internal_branches: np.ndarray
    boundary_branches: np.ndarray
    owned: np.ndarray
    neighbors: tuple[int, ...] = ()


@dataclass
class SusceptanceBlocks:
    """Per-area blocks in p.u.; `*_j` dicts are keyed by neighbour area index."""

    b_ii: np.ndarray
    b_ib: np.ndarray
    b_bi: np.ndarray
    b_bb: np.ndarray
    b_bj: dict[int, np.ndarray] = field(default_factory=dict)
    h_ii: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    h_ib: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    h_bb: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    h_bj: dict[int, np.ndarray] = field(default_factory=dict)


@dataclass
class DcModel:
    """
    Assembled DC network.

    `susceptance` is the full Laplacian B (p.u., not grounded) and `flow_matrix`
    maps bus angles to per-branch flows in p.u. (b·(δ_from − δ_to)). The global
    boundary vector θ lists boundary buses sorted by (area index, bus id);
    `theta_buses[p]` is the bus position of coordinate p.
    """

    base_mva: float
    bus_ids: np.ndarray
    bus_area: np.ndarray
    load_mw: np.ndarray
    angle_min: np.ndarray
    angle_max: np.ndarray
    susceptance: np.ndarray
    flow_matrix: np.ndarray
    branch_limits: np.ndarray
    branch_ends: np.ndarray
    gen_bus: np.ndarray
    gen_q: np.ndarray
    gen_c: np.ndarray
    gen_pmin: np.ndarray
    gen_pmax: np.ndarray
    reference: int
    theta_buses: np.ndarray
    theta_owner: np.ndarray
    areas: list[AreaBlocks]

    @property
    def n_bus(self) -> int:
        return self.bus_ids.size

    @property
    def theta_dim(self) -> int:
        return self.theta_buses.size

    def theta_index(self) -> dict[int, int]:
        """Bus position → θ coordinate."""
        return {int(bus): p for p, bus in enumerate(self.theta_buses)}

    def blocks(self, i: int) -> SusceptanceBlocks:
        """Susceptance and flow-sensitivity blocks of area i."""
        area = self.areas[i]
        B, Hf = self.susceptance, self.flow_matrix
        inner, bnd = area.internal, area.boundary
        b_bj = {}
        h_bj = {}
        for j in area.neighbors:
            other = self.areas[j].boundary
            b_bj[j] = B[np.ix_(bnd, other)]
            h_bj[j] = Hf[np.ix_(area.boundary_branches, other)]
        return SusceptanceBlocks(
            b_ii=B[np.ix_(inner, inner)],
            b_ib=B[np.ix_(inner, bnd)],
            b_bi=B[np.ix_(bnd, inner)],
            b_bb=B[np.ix_(bnd, bnd)],
            b_bj=b_bj,
            h_ii=Hf[np.ix_(area.internal_branches, inner)],
            h_ib=Hf[np.ix_(area.internal_branches, bnd)],
            h_bb=Hf[np.ix_(area.boundary_branches, bnd)],
            h_bj=h_bj,
        )

    def flows_mw(self, angles: np.ndarray) -> np.ndarray:
        return self.base_mva * (self.flow_matrix @ angles)


def build_dc_model(case: NetworkCase) -> DcModel:
    """
    Assemble B and the flow matrix and partition them by area.

    A bus is boundary iff it touches a tie-line. The reference must be the
    flagged bus of the case.

    Raises:
        SingularNetworkError: If the network is disconnected, so grounded B is singular
    """
    positions = case.bus_positions()
    n_bus = len(case.buses)
    n_branch = len(case.branches)
    area_labels = case.areas
    area_index = {label: k for k, label in enumerate(area_labels)}

    ends = np.array(
        [[positions[br.from_bus], positions[br.to_bus]] for br in case.branches], dtype=int
    ).reshape(n_branch, 2)
    b = np.array([br.b_pu for br in case.branches], dtype=float)

    flow_matrix = np.zeros((n_branch, n_bus))
    flow_matrix[np.arange(n_branch), ends[:, 0]] = b
    flow_matrix[np.arange(n_branch), ends[:, 1]] -= b
    incidence = np.zeros((n_branch, n_bus))
    incidence[np.arange(n_branch), ends[:, 0]] = 1.0
    incidence[np.arange(n_branch), ends[:, 1]] -= 1.0
    susceptance = incidence.T @ flow_matrix

    graph = coo_matrix((np.ones(n_branch), (ends[:, 0], ends[:, 1])), shape=(n_bus, n_bus))
    n_components, _ = connected_components(graph, directed=False)
    if n_components > 1:
        raise SingularNetworkError(f"network with {n_components} islands")

    bus_area = np.array([area_index[bus.area] for bus in case.buses], dtype=int)
    bus_ids = np.array([bus.id for bus in case.buses], dtype=int)
    is_tie = np.array([br.tie for br in case.branches], dtype=bool)
    is_boundary = np.zeros(n_bus, dtype=bool)
    is_boundary[ends[is_tie].ravel()] = True

    theta_buses = np.array(
        sorted(np.flatnonzero(is_boundary), key=lambda k: (bus_area[k], bus_ids[k])), dtype=int
    )
    theta_owner = bus_area[theta_buses]

    gen_bus = np.array([positions[gen.bus] for gen in case.generators], dtype=int)
    reference = next(k for k, bus in enumerate(case.buses) if bus.ref)

    areas = []
    for k, label in enumerate(area_labels):
        members = np.flatnonzero(bus_area == k)
        members = members[np.argsort(bus_ids[members], kind="stable")]
        internal = members[~is_boundary[members]]
        boundary = members[is_boundary[members]]
        internal_branches = []
        boundary_branches = []
        neighbors = set()
        for line, (u, v) in enumerate(ends):
            if is_tie[line]:
                if bus_area[u] == k:
                    boundary_branches.append(line)
                if bus_area[u] == k or bus_area[v] == k:
                    neighbors.add(int(bus_area[v] if bus_area[u] == k else bus_area[u]))
            elif bus_area[u] == k:
                if is_boundary[u] and is_boundary[v]:
                    boundary_branches.append(line)
                else:
                    internal_branches.append(line)
        areas.append(
            AreaBlocks(
                index=k,
                label=label,
                buses=members,
                internal=internal,
                boundary=boundary,
                generators=np.flatnonzero(bus_area[gen_bus] == k) if gen_bus.size else gen_bus,
                internal_branches=np.array(internal_branches, dtype=int),
                boundary_branches=np.array(boundary_branches, dtype=int),
                owned=np.flatnonzero(theta_owner == k),
                neighbors=tuple(sorted(neighbors)),
            )
        )

    logger.debug(
        f"DC model: {n_bus} buses, {n_branch} branches, {len(areas)} areas, "
        f"boundary dimension {theta_buses.size}"
    )
    return DcModel(
        base_mva=case.base_mva,
        bus_ids=bus_ids,
        bus_area=bus_area,
        load_mw=np.array([bus.load_mw for bus in case.buses], dtype=float),
        angle_min=np.array([bus.angle_min for bus in case.buses], dtype=float),
        angle_max=np.array([bus.angle_max for bus in case.buses], dtype=float),
        susceptance=susceptance,
        flow_matrix=flow_matrix,
        branch_limits=np.array([br.limit_mw for br in case.branches], dtype=float),
        branch_ends=ends,
        gen_bus=gen_bus,
        gen_q=np.array([gen.q_cost for gen in case.generators], dtype=float),
        gen_c=np.array([gen.c_cost for gen in case.generators], dtype=float),
        gen_pmin=np.array([gen.pmin_mw for gen in case.generators], dtype=float),
        gen_pmax=np.array([gen.pmax_mw for gen in case.generators], dtype=float),
        reference=reference,
        theta_buses=theta_buses,
        theta_owner=theta_owner,
        areas=areas,
    )
