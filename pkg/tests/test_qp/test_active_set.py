"""Tests for the active-set LP/QP solver."""

import numpy as np
import pytest

from src.qp import QpProblem, SolveStatus, check_kkt, solve_lp, solve_qp
from src.utils.exceptions import ProblemValidationError
from tests.oracles import brute_force_lp, brute_force_qp, random_lp, random_qp


class TestSolveQp:
    """Test solve_qp on hand-checkable problems."""

    def test_unconstrained_minimum(self):
        solution = solve_qp(QpProblem(np.eye(2), np.zeros(2)))
        assert solution.status is SolveStatus.OPTIMAL
        np.testing.assert_allclose(solution.primal, [0.0, 0.0], atol=1e-12)
        assert solution.objective == pytest.approx(0.0, abs=1e-12)

    def test_toy_coupling_constraint(self):
        problem = QpProblem(2 * np.eye(2), np.zeros(2), [[1.0, 1.0]], [-1.0])
        solution = solve_qp(problem)
        np.testing.assert_allclose(solution.primal, [-0.5, -0.5], atol=1e-10)
        assert solution.active_set == (0,)
        assert solution.ineq_duals[0] == pytest.approx(1.0, abs=1e-10)
        assert solution.objective == pytest.approx(0.5, abs=1e-10)
        assert not solution.degenerate
        assert check_kkt(problem, solution).ok

    def test_equality_multiplier_sign(self):
        problem = QpProblem(np.eye(2), np.zeros(2), eq_matrix=[[1.0, 1.0]], eq_rhs=[2.0])
        solution = solve_qp(problem)
        np.testing.assert_allclose(solution.primal, [1.0, 1.0], atol=1e-10)
        assert solution.eq_duals[0] == pytest.approx(-1.0, abs=1e-10)

    def test_degenerate_vertex_flagged(self):
        # Three constraints pass through the optimum (1, 1).
        G = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        problem = QpProblem(np.eye(2), [-3.0, -3.0], G, [1.0, 1.0, 2.0])
        solution = solve_qp(problem)
        np.testing.assert_allclose(solution.primal, [1.0, 1.0], atol=1e-10)
        assert solution.active_set == (0, 1, 2)
        assert solution.degenerate
        assert check_kkt(problem, solution).ok

    def test_singular_hessian_with_bounds(self):
        problem = QpProblem(np.diag([2.0, 0.0]), [0.0, 1.0], [[0.0, -1.0]], [1.0])
        solution = solve_qp(problem)
        np.testing.assert_allclose(solution.primal, [0.0, -1.0], atol=1e-10)
        assert solution.active_set == (0,)

    def test_infeasible_returns_farkas_certificate(self):
        G = np.array([[1.0], [-1.0]])
        h = np.array([-1.0, -1.0])
        solution = solve_qp(QpProblem(np.eye(1), [0.0], G, h))
        assert solution.status is SolveStatus.INFEASIBLE
        certificate = solution.certificate
        assert certificate is not None
        assert np.all(certificate >= -1e-12)
        assert G.T @ certificate == pytest.approx([0.0], abs=1e-9)
        assert h @ certificate < 0

    def test_unbounded_qp_returns_ray(self):
        solution = solve_qp(QpProblem(np.diag([1.0, 0.0]), [0.0, -1.0]))
        assert solution.status is SolveStatus.UNBOUNDED
        assert solution.certificate[1] > 0

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(7)
        problem = random_qp(rng)
        order = rng.permutation(problem.n_ineq)
        permuted = QpProblem(
            problem.hessian,
            problem.linear_cost,
            problem.ineq_matrix[order],
            problem.ineq_rhs[order],
        )
        assert solve_qp(permuted).objective == pytest.approx(
            solve_qp(problem).objective, abs=1e-9
        )

    def test_rejects_indefinite_hessian(self):
        with pytest.raises(ProblemValidationError):
            solve_qp(QpProblem(np.diag([1.0, -1.0]), np.zeros(2)))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ProblemValidationError):
            solve_qp(QpProblem(np.eye(2), np.zeros(2), [[1.0, 1.0]], [1.0, 2.0]))


class TestSolveLp:
    """Test solve_lp vertex behavior."""

    def test_lower_bound_active(self):
        problem = QpProblem.linear([1.0], ineq_matrix=[[1.0], [-1.0]], ineq_rhs=[1.0, 0.0])
        solution = solve_lp(problem)
        assert solution.primal[0] == pytest.approx(0.0, abs=1e-12)
        assert solution.active_set == (1,)

    def test_facet_optimum_is_deterministic(self):
        G = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        problem = QpProblem.linear([-1.0, -1.0], ineq_matrix=G, ineq_rhs=[1.0, 0.0, 0.0])
        first = solve_lp(problem)
        second = solve_lp(problem)
        assert first.objective == pytest.approx(-1.0, abs=1e-12)
        assert first.active_set == second.active_set
        np.testing.assert_array_equal(first.primal, second.primal)

    def test_unbounded_lp(self):
        problem = QpProblem.linear([-1.0], ineq_matrix=[[-1.0]], ineq_rhs=[0.0])
        solution = solve_lp(problem)
        assert solution.status is SolveStatus.UNBOUNDED
        assert solution.certificate[0] > 0

    def test_requires_zero_hessian(self):
        with pytest.raises(ProblemValidationError):
            solve_lp(QpProblem(np.eye(1), [1.0]))


class TestOracleAgreement:
    """Random instances against brute-force enumeration."""

    @pytest.mark.parametrize("seed", range(250))
    def test_random_qp_matches_enumeration(self, seed):
        problem = random_qp(np.random.default_rng(seed))
        solution = solve_qp(problem)
        assert solution.status is SolveStatus.OPTIMAL
        assert solution.objective == pytest.approx(brute_force_qp(problem), abs=1e-9, rel=1e-9)
        assert check_kkt(problem, solution).ok

    @pytest.mark.parametrize("seed", range(250))
    def test_random_lp_matches_vertices(self, seed):
        problem = random_lp(np.random.default_rng(10_000 + seed))
        solution = solve_lp(problem)
        assert solution.status is SolveStatus.OPTIMAL
        assert solution.objective == pytest.approx(brute_force_lp(problem), abs=1e-9, rel=1e-9)
        assert check_kkt(problem, solution).ok
