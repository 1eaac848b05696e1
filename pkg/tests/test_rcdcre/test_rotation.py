"""Tests for the Givens-compounded coordinate rotation."""

import numpy as np
import pytest

from src.rcdcre.rotation import build_rotation, givens, pivot_index

HALF = np.sqrt(0.5)


class TestGivens:
    """Single plane rotations."""

    def test_zeroes_second_component(self):
        c, s = givens(3.0, 4.0)
        assert c * 3.0 + s * 4.0 == pytest.approx(5.0)
        assert -s * 3.0 + c * 4.0 == pytest.approx(0.0)

    def test_zero_pair(self):
        assert givens(0.0, 0.0) == (1.0, 0.0)


class TestPivotIndex:
    """Axis choice."""

    def test_largest_magnitude(self):
        assert pivot_index([0.1, -3.0, 2.0]) == 1

    def test_ties_go_to_lowest_index(self):
        assert pivot_index([1.0, -1.0]) == 0


class TestBuildRotation:
    """Orthogonality and alignment."""

    def test_descent_direction_of_the_toy(self):
        rotation = build_rotation([HALF, -HALF])
        np.testing.assert_allclose(rotation, [[HALF, -HALF], [HALF, HALF]], atol=1e-12)
        np.testing.assert_allclose(rotation @ [HALF, -HALF], [1.0, 0.0], atol=1e-12)

    def test_axis_vector_gives_identity(self):
        np.testing.assert_array_equal(build_rotation([0.0, 0.0, 1.0], pivot=2), np.eye(3))

    def test_random_vector_in_six_dimensions(self):
        rng = np.random.default_rng(7)
        v = rng.standard_normal(6)
        rotation = build_rotation(v)
        k = pivot_index(v)
        target = np.zeros(6)
        target[k] = np.linalg.norm(v)
        assert np.linalg.norm(rotation @ v - target) <= 1e-12 * max(1.0, np.linalg.norm(v))
        np.testing.assert_allclose(rotation.T @ rotation, np.eye(6), atol=1e-12)

    def test_negative_axis_is_flipped(self):
        rotation = build_rotation([0.0, -2.0, 0.0])
        np.testing.assert_allclose(rotation @ [0.0, -1.0, 0.0], [0.0, 1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(rotation.T @ rotation, np.eye(3), atol=1e-12)

    def test_one_dimension(self):
        np.testing.assert_array_equal(build_rotation([-0.3]), [[-1.0]])

    def test_deterministic(self):
        v = np.array([0.2, -0.7, 0.4, 0.1])
        np.testing.assert_array_equal(build_rotation(v), build_rotation(v.copy()))

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            build_rotation([0.0, 0.0])
