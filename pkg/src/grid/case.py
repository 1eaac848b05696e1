"""Network case schema and invariant checks."""

import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class Bus(BaseModel):
    """A bus with its area label and MW load."""

    model_config = ConfigDict(extra="forbid")

    id: int
    area: int
    load_mw: float = 0.0
    ref: bool = False
    angle_min: float = -math.pi
    angle_max: float = math.pi


class Branch(BaseModel):
    """A lossless branch; `b_pu` is the series susceptance 1/x in p.u."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    from_bus: int = Field(alias="from")
    to_bus: int = Field(alias="to")
    b_pu: float = Field(gt=0.0)
    limit_mw: float = Field(gt=0.0)
    tie: bool = False


class Generator(BaseModel):
    """
    A dispatchable unit with cost ½·q_cost·g² + c_cost·g ($/h, g in MW).

    `q_cost` is the Hessian diagonal entry, not the MATPOWER c2 coefficient.
    """

    model_config = ConfigDict(extra="forbid")

    bus: int
    pmin_mw: float = 0.0
    pmax_mw: float
    q_cost: float = Field(default=0.0, ge=0.0)
    c_cost: float = 0.0

    @model_validator(mode="after")
    def _check_limits(self) -> "Generator":
        if self.pmin_mw > self.pmax_mw:
            raise ValueError(f"pmin_mw {self.pmin_mw} exceeds pmax_mw {self.pmax_mw}")
        return self


class Provenance(BaseModel):
    """Where a generated case came from."""

    generator: str
    seed: int | None = None
    version: str
    extra: dict[str, Any] = Field(default_factory=dict)


class NetworkCase(BaseModel):
    """A multi-area network. Bus ids are unique; area labels are arbitrary integers."""

    model_config = ConfigDict(extra="forbid")

    name: str = "case"
    base_mva: float = Field(default=100.0, gt=0.0)
    buses: list[Bus]
    branches: list[Branch] = Field(default_factory=list)
    generators: list[Generator] = Field(default_factory=list)
    provenance: Provenance | None = None

    @property
    def areas(self) -> list[int]:
        """Area labels in ascending order; list position is the area index."""
        return sorted({bus.area for bus in self.buses})

    def bus_positions(self) -> dict[int, int]:
        return {bus.id: k for k, bus in enumerate(self.buses)}

    def boundary_bus_ids(self) -> set[int]:
        """Buses incident to at least one tie-line."""
        ids: set[int] = set()
        for branch in self.branches:
            if branch.tie:
                ids.update((branch.from_bus, branch.to_bus))
        return ids

    def total_load(self) -> float:
        return float(sum(bus.load_mw for bus in self.buses))

    def check_invariants(self) -> list[str]:
        """
        Return every violated network invariant as a readable message.

        An empty list means the case is usable for modelling.
        """
        violations: list[str] = []

        positions: dict[int, int] = {}
        for k, bus in enumerate(self.buses):
            if bus.id in positions:
                violations.append(f"buses[{k}]: duplicate bus id {bus.id}")
            positions.setdefault(bus.id, k)
            if bus.angle_min > bus.angle_max:
                violations.append(f"buses[{k}]: angle_min exceeds angle_max")

        refs = [bus.id for bus in self.buses if bus.ref]
        if len(refs) != 1:
            violations.append(f"exactly one reference bus required, found {len(refs)} {refs}")

        area_of = {bus.id: bus.area for bus in self.buses}
        for k, branch in enumerate(self.branches):
            label = f"branches[{k}] ({branch.from_bus}-{branch.to_bus})"
            unknown = [b for b in (branch.from_bus, branch.to_bus) if b not in area_of]
            if unknown:
                violations.append(f"{label}: unknown bus {unknown[0]}")
                continue
            if branch.from_bus == branch.to_bus:
                violations.append(f"{label}: connects a bus to itself")
            same_area = area_of[branch.from_bus] == area_of[branch.to_bus]
            if branch.tie and same_area:
                violations.append(
                    f"{label}: marked tie-line but both ends are in area "
                    f"{area_of[branch.from_bus]}"
                )
            if not branch.tie and not same_area:
                violations.append(
                    f"{label}: internal branch joins areas {area_of[branch.from_bus]} "
                    f"and {area_of[branch.to_bus]}"
                )

        boundary = self.boundary_bus_ids()
        for k, gen in enumerate(self.generators):
            if gen.bus not in area_of:
                violations.append(f"generators[{k}]: unknown bus {gen.bus}")
            elif gen.bus in boundary:
                violations.append(f"generators[{k}]: sits on boundary bus {gen.bus}")

        if not violations:
            violations.extend(self._disconnected_areas(area_of))
        return violations

    def _disconnected_areas(self, area_of: dict[int, int]) -> list[str]:
        messages = []
        for area in self.areas:
            members = [bus.id for bus in self.buses if bus.area == area]
            local = {bus_id: k for k, bus_id in enumerate(members)}
            rows, cols = [], []
            for branch in self.branches:
                if branch.tie or area_of[branch.from_bus] != area:
                    continue
                rows.append(local[branch.from_bus])
                cols.append(local[branch.to_bus])
            graph = coo_matrix(
                (np.ones(len(rows)), (rows, cols)), shape=(len(members), len(members))
            )
            count, _ = connected_components(graph, directed=False)
            if count > 1:
                messages.append(
                    f"area {area}: internal network splits into {count} islands"
                )
        return messages
