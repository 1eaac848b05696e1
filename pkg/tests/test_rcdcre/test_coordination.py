"""Tests for the coordination solves and the ℓ1 weight schedule."""

import numpy as np
import pytest

from src.grid import CouplingSet
from src.parametric import bigM_reformulate, combine_pieces, evaluate_at
from src.rcdcre.config import AlgoConfig
from src.rcdcre.coordination import (
    adapt_sigma,
    penalized_value,
    solve_hard_coordination,
    solve_l1_coordination,
)
from src.utils.exceptions import CoordinationError, StepsizeViolationError


@pytest.fixture
def toy_coupling(toy_areas):
    return CouplingSet.from_problems(toy_areas)


@pytest.fixture
def toy_piece(toy_areas):
    """Combined piece of the penalized toy, Σ𝒥 = θ₁² + θ₂²."""
    penalized = [bigM_reformulate(area) for area in toy_areas]

    def build(theta):
        return combine_pieces([evaluate_at(area, theta)[1] for area in penalized])

    return build


class TestL1Coordination:
    """Penalized coordination over one area's coordinates."""

    def test_area_one_moves_to_the_unconstrained_minimum(self, toy_piece, toy_coupling):
        piece = toy_piece([-1.0, -1.001])
        result = solve_l1_coordination(piece, toy_coupling, [-1.0, -1.0], [1], 1e3)
        np.testing.assert_allclose(result.theta, [-1.0, 0.0], atol=1e-8)
        assert result.objective == pytest.approx(1.0, abs=1e-8)
        np.testing.assert_allclose(result.duals, [0.0], atol=1e-8)
        np.testing.assert_allclose(result.violation, [0.0], atol=1e-8)

    def test_all_coordinates_reach_the_optimum(self, toy_piece, toy_coupling):
        piece = toy_piece([0.0, 0.0])
        result = solve_l1_coordination(piece, toy_coupling, [0.0, 0.0], [0, 1], 1e3)
        np.testing.assert_allclose(result.theta, [-0.5, -0.5], atol=1e-8)
        assert result.objective == pytest.approx(0.5, abs=1e-8)
        np.testing.assert_allclose(result.duals, [1.0], atol=1e-7)

    def test_small_weight_leaves_the_coupling_violated(self, toy_piece, toy_coupling):
        piece = toy_piece([2.0, 2.0])
        result = solve_l1_coordination(piece, toy_coupling, [2.0, 2.0], [1], 2.0)
        np.testing.assert_allclose(result.theta, [2.0, -1.0], atol=1e-8)
        assert result.objective == pytest.approx(9.0, abs=1e-8)
        np.testing.assert_allclose(result.violation, [2.0], atol=1e-8)
        np.testing.assert_allclose(result.duals, [2.0], atol=1e-7)
        assert result.dual_sum == pytest.approx(2.0, abs=1e-7)

    def test_pinned_only_rows_get_zero_multipliers(self, toy_piece):
        coupling = CouplingSet(
            matrix=np.array([[1.0, 1.0], [1.0, 0.0]]),
            rhs=np.array([-1.0, -3.0]),
            owner=np.array([0, 0]),
        )
        piece = toy_piece([-1.0, -1.0])
        result = solve_l1_coordination(piece, coupling, [-1.0, -1.0], [1], 1e3)
        np.testing.assert_allclose(result.theta, [-1.0, 0.0], atol=1e-8)
        assert result.duals[1] == 0.0
        # The pinned row is violated by 2 and priced into the objective
        assert result.objective == pytest.approx(1.0 + 2e3, rel=1e-9)

    def test_nonpositive_weight_rejected(self, toy_piece, toy_coupling):
        with pytest.raises(CoordinationError):
            solve_l1_coordination(toy_piece([0.0, 0.0]), toy_coupling, [0.0, 0.0], [1], 0.0)

    def test_accepts_per_area_pieces(self, toy_areas, toy_coupling):
        penalized = [bigM_reformulate(area) for area in toy_areas]
        pieces = [evaluate_at(area, [0.0, 0.0])[1] for area in penalized]
        result = solve_l1_coordination(pieces, toy_coupling, [0.0, 0.0], [0, 1], 1e3)
        np.testing.assert_allclose(result.theta, [-0.5, -0.5], atol=1e-8)


class TestHardCoordination:
    """Coordination with the coupling set as hard rows."""

    def test_every_coordinate(self, toy_piece, toy_coupling):
        result = solve_hard_coordination(toy_piece([-1.0, -1.0]), toy_coupling, [-1.0, -1.0])
        np.testing.assert_allclose(result.theta, [-0.5, -0.5], atol=1e-8)
        assert result.objective == pytest.approx(0.5, abs=1e-8)
        np.testing.assert_allclose(result.duals, [1.0], atol=1e-7)

    def test_one_coordinate(self, toy_piece, toy_coupling):
        result = solve_hard_coordination(
            toy_piece([-1.0, -1.0]), toy_coupling, [-1.0, -1.0], free=[1]
        )
        np.testing.assert_allclose(result.theta, [-1.0, 0.0], atol=1e-8)

    def test_violated_pinned_row_raises(self, toy_piece):
        coupling = CouplingSet(
            matrix=np.array([[1.0, 0.0]]), rhs=np.array([-3.0]), owner=np.array([0])
        )
        with pytest.raises(StepsizeViolationError):
            solve_hard_coordination(toy_piece([-1.0, -1.0]), coupling, [-1.0, -1.0], free=[1])


class TestPenalizedValue:
    """Σ𝒥 plus the weighted hinge."""

    def test_inside_and_outside(self, toy_piece, toy_coupling):
        piece = toy_piece([0.0, 0.0])
        assert penalized_value(piece, toy_coupling, np.array([-1.0, 0.0]), 5.0) == pytest.approx(
            1.0
        )
        assert penalized_value(piece, toy_coupling, np.array([1.0, 1.0]), 5.0) == pytest.approx(
            2.0 + 15.0
        )


class TestAdaptSigma:
    """Growth of the ℓ1 weight."""

    def test_grows_when_multipliers_reach_the_weight(self):
        assert adapt_sigma(np.array([2.0]), 2.0) == pytest.approx(30.0)

    def test_custom_growth(self):
        config = AlgoConfig(sigma_growth=2.0, sigma_margin=1.0)
        assert adapt_sigma(np.array([10.0]), 5.0, config) == pytest.approx(22.0)

    def test_unchanged_when_weight_clears_the_multipliers(self):
        assert adapt_sigma(np.array([0.5, 0.2]), 1e3) == 1e3

    def test_negative_multipliers_ignored(self):
        assert adapt_sigma(np.array([-5.0]), 2.0) == 2.0

    def test_capped(self):
        config = AlgoConfig(sigma_max=50.0)
        assert adapt_sigma(np.array([100.0]), 2.0, config) == 50.0
        assert adapt_sigma(np.array([100.0]), 50.0, config) == 50.0
