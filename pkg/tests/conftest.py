"""Shared fixtures: small hand-checkable cases and the stitched 44-bus system."""

from pathlib import Path

import pytest

from src.grid import (
    NetworkCase,
    build_dc_model,
    quadratic_toy,
    quadratic_toy_joint,
    reduce_to_compact,
    two_area_44,
)
from src.parametric import bigM_reformulate

FIXTURES = Path(__file__).parent / "fixtures"


def three_bus_payload() -> dict:
    return {
        "name": "three-bus",
        "buses": [
            {"id": 1, "area": 1, "load_mw": 0.0, "ref": True},
            {"id": 2, "area": 1, "load_mw": 60.0},
            {"id": 3, "area": 1, "load_mw": 40.0},
        ],
        "branches": [
            {"from": 1, "to": 2, "b_pu": 10.0, "limit_mw": 100.0},
            {"from": 2, "to": 3, "b_pu": 10.0, "limit_mw": 100.0},
        ],
        "generators": [
            {"bus": 1, "pmin_mw": 0.0, "pmax_mw": 200.0, "q_cost": 0.02, "c_cost": 10.0},
            {"bus": 3, "pmin_mw": 0.0, "pmax_mw": 50.0, "q_cost": 0.0, "c_cost": 30.0},
        ],
    }


def two_area_toy_payload() -> dict:
    """
    Buses 1-2 form area 1, buses 3-4 area 2, one 30 MW tie 2-3.

    Area 1 generates at $10/MWh, area 2 at $30/MWh, so the tie is saturated
    and the optimal cost is 70·10 + 30·30 = 1600.
    """
    return {
        "name": "two-area-toy",
        "buses": [
            {"id": 1, "area": 1, "load_mw": 0.0, "ref": True},
            {"id": 2, "area": 1, "load_mw": 40.0},
            {"id": 3, "area": 2, "load_mw": 0.0},
            {"id": 4, "area": 2, "load_mw": 60.0},
        ],
        "branches": [
            {"from": 1, "to": 2, "b_pu": 10.0, "limit_mw": 100.0},
            {"from": 3, "to": 4, "b_pu": 10.0, "limit_mw": 100.0},
            {"from": 2, "to": 3, "b_pu": 10.0, "limit_mw": 30.0, "tie": True},
        ],
        "generators": [
            {"bus": 1, "pmin_mw": 0.0, "pmax_mw": 200.0, "c_cost": 10.0},
            {"bus": 4, "pmin_mw": 0.0, "pmax_mw": 200.0, "c_cost": 30.0},
        ],
    }


@pytest.fixture
def three_bus_case() -> NetworkCase:
    return NetworkCase.model_validate(three_bus_payload())


@pytest.fixture
def two_area_toy() -> NetworkCase:
    return NetworkCase.model_validate(two_area_toy_payload())


@pytest.fixture
def toy_problems(two_area_toy):
    return reduce_to_compact(build_dc_model(two_area_toy))


@pytest.fixture(scope="session")
def case44() -> NetworkCase:
    return two_area_44(seed=1)


@pytest.fixture(scope="session")
def case44_linear() -> NetworkCase:
    return two_area_44(seed=1, linear=True)


@pytest.fixture(scope="session")
def problems44(case44):
    return reduce_to_compact(build_dc_model(case44))


@pytest.fixture(scope="session")
def problems44_linear(case44_linear):
    return reduce_to_compact(build_dc_model(case44_linear))


@pytest.fixture(scope="session")
def penalized44(problems44):
    return [bigM_reformulate(problem) for problem in problems44]


@pytest.fixture(scope="session")
def penalized44_linear(problems44_linear):
    return [bigM_reformulate(problem) for problem in problems44_linear]


@pytest.fixture
def toy_areas():
    return quadratic_toy()


@pytest.fixture
def toy_joint():
    return quadratic_toy_joint()
