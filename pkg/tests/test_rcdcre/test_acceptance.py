"""End-to-end runs on the stitched test systems."""

import numpy as np
import pytest

from src.grid import build_dc_model, four_area_472, reduce_to_compact
from src.methods.admm import run_admm
from src.methods.benders import run_benders
from src.methods.centralized import solve_centralized
from src.methods.cre import run_cre
from src.parametric import bigM_reformulate
from src.qp import SolveStatus, solve_qp
from src.rcdcre.core import run

GAP = 1e-3

# 270 MW over the two 4-21 ties: more than the lines around bus 21 can carry
COLD_START = np.array([0.15, -0.15])


def relative_gap(objective: float, reference: float) -> float:
    return abs(objective - reference) / abs(reference)


@pytest.mark.slow
class TestTwoArea44:
    """RCDCRE against the centralized optimum on the 44-bus case."""

    @pytest.mark.parametrize("fixture", ["problems44", "problems44_linear"])
    def test_reaches_centralized_objective(self, fixture, request):
        problems = request.getfixturevalue(fixture)
        reference = solve_centralized(problems)
        result = run(problems, reference_objective=reference.objective)
        assert result.certified
        assert relative_gap(result.objective, reference.objective) <= GAP
        assert result.trace.iterations_to(GAP) is not None

    def test_quadratic_case_rotates(self, problems44):
        result = run(problems44)
        assert result.certified
        assert result.rotations >= 1

    def test_cold_start_outside_the_feasible_set(self, problems44_linear):
        assert problems44_linear[0].theta_dim == COLD_START.size
        hard = [solve_qp(problem.at(COLD_START)) for problem in problems44_linear]
        assert any(solution.status is not SolveStatus.OPTIMAL for solution in hard)
        soft = [
            solve_qp(bigM_reformulate(problem).at(COLD_START)) for problem in problems44_linear
        ]
        assert all(solution.status is SolveStatus.OPTIMAL for solution in soft)

        reference = solve_centralized(problems44_linear)
        cold = run(problems44_linear, start=COLD_START, reference_objective=reference.objective)
        records = cold.trace.records
        assert records[0].stage == "penalized"
        assert records[0].infeas_norm > 0.0
        cleared = next(
            k
            for k, record in enumerate(records)
            if record.stage in ("outside-coupling", "feasible")
        )
        assert all(record.phase != "rotate" for record in records[:cleared])
        assert records[-1].stage == "feasible"
        assert cold.trace.first_feasible_iteration() is not None
        assert cold.certified
        assert relative_gap(cold.objective, reference.objective) <= GAP


@pytest.fixture(scope="module")
def ring():
    problems = reduce_to_compact(build_dc_model(four_area_472(seed=1)))
    reference = solve_centralized(problems)
    assert reference.optimal
    return problems, reference.objective


@pytest.fixture(scope="module")
def ring_results(ring):
    problems, reference = ring
    return {
        "cre": run_cre(problems, reference_objective=reference),
        "admm": run_admm(problems, reference_objective=reference),
        "benders": run_benders(problems, reference_objective=reference),
        "rcdcre": run(problems, reference_objective=reference),
    }


@pytest.mark.slow
class TestFourArea472:
    """RCDCRE and the baselines on the four-area ring."""

    @pytest.mark.parametrize("method", ["cre", "admm", "benders", "rcdcre"])
    def test_reaches_centralized_objective(self, method, ring, ring_results):
        _, reference = ring
        result = ring_results[method]
        assert relative_gap(result.objective, reference) <= GAP
        assert result.trace.iterations_to(GAP) is not None

    def test_rcdcre_needs_fewer_iterations_than_admm_and_benders(self, ring_results):
        iterations = {
            method: result.trace.iterations_to(GAP) for method, result in ring_results.items()
        }
        assert iterations["rcdcre"] < iterations["admm"]
        assert iterations["rcdcre"] < iterations["benders"]
