"""Tests for the centralized reference and the feasible start."""

import numpy as np
import pytest

from src.grid import CouplingSet
from src.methods.centralized import CentralizedMethod, find_feasible_theta, solve_centralized
from src.methods.settings import MethodSettings
from src.utils.exceptions import CoordinationError


class TestSolveCentralized:
    """Joint optimum of hand-checked cases."""

    def test_toy(self, toy_areas):
        result = solve_centralized(toy_areas)
        assert result.optimal
        assert result.objective == pytest.approx(0.5, abs=1e-9)
        np.testing.assert_allclose(result.theta, [-0.5, -0.5], atol=1e-9)
        np.testing.assert_allclose(np.concatenate(result.local), [-0.5, -0.5], atol=1e-9)

    def test_toy_matches_the_single_area_formulation(self, toy_areas, toy_joint):
        split = solve_centralized(toy_areas)
        joint = solve_centralized([toy_joint])
        assert split.objective == pytest.approx(joint.objective, abs=1e-9)

    def test_saturated_tie(self, toy_problems):
        result = solve_centralized(toy_problems)
        assert result.objective == pytest.approx(1600.0, rel=1e-9)

    def test_infeasible_coupling_reports_nan(self, toy_areas):
        coupling = CouplingSet(
            matrix=np.array([[1.0, 0.0], [-1.0, 0.0]]),
            rhs=np.array([-1.0, -1.0]),
            owner=np.array([0, 0]),
        )
        result = solve_centralized(toy_areas, coupling)
        assert not result.optimal
        assert np.isnan(result.objective)


class TestFindFeasibleTheta:
    """ℓ1-nearest feasible boundary vector."""

    def test_feasible_start_is_kept(self, toy_areas):
        np.testing.assert_allclose(
            find_feasible_theta(toy_areas, start=np.array([-1.0, -1.0])), [-1.0, -1.0], atol=1e-9
        )

    def test_infeasible_start_is_moved(self, toy_areas):
        start = np.array([1.0, 1.0])
        theta = find_feasible_theta(toy_areas, start=start)
        coupling = CouplingSet.from_problems(toy_areas)
        assert coupling.contains(theta)
        assert np.sum(np.abs(theta - start)) == pytest.approx(3.0, abs=1e-9)

    def test_no_feasible_theta(self, toy_areas):
        coupling = CouplingSet(
            matrix=np.array([[1.0, 0.0], [-1.0, 0.0]]),
            rhs=np.array([-1.0, -1.0]),
            owner=np.array([0, 0]),
        )
        with pytest.raises(CoordinationError):
            find_feasible_theta(toy_areas, coupling)


class TestCentralizedMethod:
    """The reference run as a method."""

    def test_single_terminate_record(self, toy_areas):
        result = CentralizedMethod().run(toy_areas, np.zeros(2), MethodSettings())
        assert result.certified
        assert len(result.trace) == 1
        record = result.trace.records[0]
        assert record.phase == "terminate"
        assert record.stage == "feasible"
        assert result.summary()["rel_gap_vs_centralized"] == pytest.approx(0.0)
