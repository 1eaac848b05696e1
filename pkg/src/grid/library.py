"""Test-system library: IEEE cases, multi-area stitching and seeded cost perturbation."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from pypower.case14 import case14
from pypower.case30 import case30
from pypower.case118 import case118

from .. import __version__
from ..utils.exceptions import StitchError
from ..utils.logger import get_logger
from .case import Branch, Bus, NetworkCase, Provenance
from .compact import CompactAreaProblem, area_problem
from .io import case_from_ppc

logger = get_logger(__name__)

IEEE_CASES: dict[str, Callable[[], dict[str, Any]]] = {
    "ieee14": case14,
    "ieee30": case30,
    "ieee118": case118,
}

DEFAULT_COST_SPREAD = 0.02


@dataclass(frozen=True)
class TieSpec:
    """A tie-line between two stitched areas, addressed by position and local bus id."""

    from_area: int
    from_bus: int
    to_area: int
    to_bus: int
    b_pu: float
    limit_mw: float | None = None


def rng_from_seed(seed: int) -> np.random.Generator:
    """The single PRNG used for generated data (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def load_ieee_case(name: str, area: int = 1) -> NetworkCase:
    """
    Load IEEE data shipped with pypower as a single-area case.

    Raises:
        KeyError: If the name is not in IEEE_CASES
    """
    return case_from_ppc(IEEE_CASES[name](), area=area, name=name)


def stitch_cases(
    cases: Sequence[NetworkCase],
    ties: Sequence[TieSpec],
    tie_limit_mw: float = 10.0,
    internal_limit_mw: float | None = 100.0,
    name: str = "stitched",
) -> NetworkCase:
    """
    Merge single-area cases into one multi-area case.

    Case k becomes area k+1 and its bus ids are shifted past the previous case's
    largest id. Internal limits are overridden when `internal_limit_mw` is set.
    The reference moves to the lowest-id non-boundary bus of area 1.

    Raises:
        StitchError: If an input is not single-area or a tie references an unknown bus
    """
    offsets: list[int] = []
    offset = 0
    for k, case in enumerate(cases):
        if len(case.areas) != 1:
            raise StitchError(f"cases[{k}] ({case.name}) has {len(case.areas)} areas, expected 1")
        offsets.append(offset)
        offset += max(bus.id for bus in case.buses)

    buses: list[Bus] = []
    branches: list[Branch] = []
    generators = []
    for k, case in enumerate(cases):
        shift = offsets[k]
        buses.extend(
            bus.model_copy(update={"id": bus.id + shift, "area": k + 1, "ref": False})
            for bus in case.buses
        )
        branches.extend(
            branch.model_copy(
                update={
                    "from_bus": branch.from_bus + shift,
                    "to_bus": branch.to_bus + shift,
                    "limit_mw": internal_limit_mw or branch.limit_mw,
                }
            )
            for branch in case.branches
        )
        generators.extend(
            gen.model_copy(update={"bus": gen.bus + shift}) for gen in case.generators
        )

    for tie in ties:
        endpoints = []
        for position, local_id in ((tie.from_area, tie.from_bus), (tie.to_area, tie.to_bus)):
            if not 0 <= position < len(cases):
                raise StitchError(f"tie {tie}: area position {position} out of range")
            if local_id not in {bus.id for bus in cases[position].buses}:
                raise StitchError(
                    f"tie {tie}: bus {local_id} not found in {cases[position].name}"
                )
            endpoints.append(local_id + offsets[position])
        branches.append(
            Branch(
                from_bus=endpoints[0],
                to_bus=endpoints[1],
                b_pu=tie.b_pu,
                limit_mw=tie.limit_mw or tie_limit_mw,
                tie=True,
            )
        )

    merged = NetworkCase(name=name, buses=buses, branches=branches, generators=generators)
    return assign_reference(merged)


def stitch_two_area_case(
    case_a: NetworkCase,
    case_b: NetworkCase,
    tie_specs: Sequence[TieSpec],
    tie_limit_mw: float = 10.0,
    internal_limit_mw: float | None = 100.0,
) -> NetworkCase:
    """Stitch exactly two single-area cases; tie specs use positions 0 and 1."""
    return stitch_cases(
        [case_a, case_b],
        tie_specs,
        tie_limit_mw=tie_limit_mw,
        internal_limit_mw=internal_limit_mw,
        name=f"{case_a.name}+{case_b.name}",
    )


def assign_reference(case: NetworkCase) -> NetworkCase:
    """Place the single reference at the lowest-id non-boundary bus of the first area."""
    boundary = case.boundary_bus_ids()
    first_area = case.areas[0]
    candidates = [b.id for b in case.buses if b.area == first_area and b.id not in boundary]
    if not candidates:
        raise StitchError(f"area {first_area} has no non-boundary bus for the reference")
    ref_id = min(candidates)
    buses = [bus.model_copy(update={"ref": bus.id == ref_id}) for bus in case.buses]
    return case.model_copy(update={"buses": buses})


def cost_scale_factors(
    rng: np.random.Generator, size: int, spread: float = DEFAULT_COST_SPREAD
) -> np.ndarray:
    """Elementwise factors 0.99 + spread·ξ with ξ standard normal."""
    return 0.99 + spread * rng.standard_normal(size)


def perturb_costs(
    case: NetworkCase, seed: int, spread: float = DEFAULT_COST_SPREAD
) -> NetworkCase:
    """Scale every linear cost by a seeded factor 0.99 + spread·ξ."""
    factors = cost_scale_factors(rng_from_seed(seed), len(case.generators), spread)
    generators = [
        gen.model_copy(update={"c_cost": gen.c_cost * float(factor)})
        for gen, factor in zip(case.generators, factors)
    ]
    return case.model_copy(update={"generators": generators})


def with_linear_costs(case: NetworkCase) -> NetworkCase:
    """Drop quadratic cost terms."""
    generators = [gen.model_copy(update={"q_cost": 0.0}) for gen in case.generators]
    return case.model_copy(update={"generators": generators, "name": f"{case.name}-linear"})


def first_load_bus(case: NetworkCase, preferred: int) -> int:
    """Lowest bus id ≥ preferred without a generator."""
    generator_buses = {gen.bus for gen in case.generators}
    candidates = sorted(
        bus.id for bus in case.buses if bus.id >= preferred and bus.id not in generator_buses
    )
    if not candidates:
        raise StitchError(f"{case.name}: no generator-free bus at or above {preferred}")
    return candidates[0]


def two_area_44(seed: int, linear: bool = False) -> NetworkCase:
    """
    IEEE 14 + IEEE 30 joined by two parallel ties (bus 4 of area 1, bus 21 of area 2).

    Ties are capped at 10 MW, internal lines at 100 MW, and linear costs are
    perturbed with the seeded factor.
    """
    ties = [
        TieSpec(from_area=0, from_bus=4, to_area=1, to_bus=21, b_pu=1.0 / 0.2),
        TieSpec(from_area=0, from_bus=4, to_area=1, to_bus=21, b_pu=1.0 / 0.25),
    ]
    case = stitch_two_area_case(load_ieee_case("ieee14"), load_ieee_case("ieee30"), ties)
    case = perturb_costs(case, seed)
    if linear:
        case = with_linear_costs(case)
    return _with_provenance(case, "two-area-44", seed, linear=linear)


def four_area_472(seed: int, linear: bool = False) -> NetworkCase:
    """
    Four IEEE 118 areas in a ring, with 50 MW ties and 500 MW internal limits.

    Each area exports through a load bus near id 33 and imports through one near id 75.
    """
    base = load_ieee_case("ieee118")
    out_bus = first_load_bus(base, 33)
    in_bus = first_load_bus(base, 75)
    ties = [
        TieSpec(from_area=k, from_bus=out_bus, to_area=(k + 1) % 4, to_bus=in_bus, b_pu=10.0)
        for k in range(4)
    ]
    case = stitch_cases(
        [base] * 4, ties, tie_limit_mw=50.0, internal_limit_mw=500.0, name="four-area-472"
    )
    case = perturb_costs(case, seed)
    if linear:
        case = with_linear_costs(case)
    return _with_provenance(case, "four-area-472", seed, linear=linear)


def _with_provenance(case: NetworkCase, generator: str, seed: int, **extra: Any) -> NetworkCase:
    provenance = Provenance(generator=generator, seed=seed, version=__version__, extra=extra)
    logger.debug(f"Generated {generator} (seed {seed}): {len(case.buses)} buses")
    return case.model_copy(update={"name": generator, "provenance": provenance})


GENERATORS: dict[str, Callable[..., NetworkCase]] = {
    "two-area-44": two_area_44,
    "four-area-472": four_area_472,
}


def quadratic_toy() -> list[CompactAreaProblem]:
    """
    Two scalar areas with Jᵢ(θ) = θᵢ², coupled by θ₁ + θ₂ ≤ −1.

    Area i minimizes x² subject to x = θᵢ and owns θᵢ; area 0 holds the
    coupling row. The optimum is θ = (−0.5, −0.5) with cost 0.5.
    """
    first = area_problem(
        0,
        [[2.0]],
        [0.0],
        2,
        eq=([[1.0]], [0.0], [[1.0, 0.0]]),
        coupling=([[1.0, 1.0]], [-1.0]),
        owned=[0],
    )
    second = area_problem(1, [[2.0]], [0.0], 2, eq=([[1.0]], [0.0], [[0.0, 1.0]]), owned=[1])
    first.neighbors = (1,)
    second.neighbors = (0,)
    return [first, second]


def quadratic_toy_joint() -> CompactAreaProblem:
    """The same toy as a single area over both coordinates, with x₁ + x₂ ≤ −1 local."""
    return area_problem(
        0,
        2.0 * np.eye(2),
        np.zeros(2),
        2,
        ineq=([[1.0, 1.0]], [-1.0], [[0.0, 0.0]]),
        eq=(np.eye(2), np.zeros(2), np.eye(2)),
        owned=[0, 1],
    )
