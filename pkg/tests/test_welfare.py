"""Welfare programs, closed forms, and the minimum-norm projection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creatorgame import (
    ConfigError,
    UserDistribution,
    closed_form_2user,
    criteria_shares,
    mean_user,
    min_norm_meet,
    naive_effort_bound,
    rng_stream,
    solve_G,
    solve_W,
    theta_star,
    welfare_upper_bound,
)
from creatorgame.welfare import EXACT_ENUM, SHARED_DIRECTION, SPECIALIZED

from helpers import random_distribution, two_users


def grid_min_norm(dist, pbar, hi, n=200):
    """Brute-force oracle: smallest-norm feasible point on an n x n grid."""
    xs = np.linspace(0.0, hi, n)
    pts = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    targets = dist.atoms @ np.asarray(pbar)
    feasible = np.all(pts @ dist.atoms.T >= targets[None, :] - 1e-12, axis=1)
    norms = np.linalg.norm(pts[feasible], axis=1)
    return pts[feasible][np.argmin(norms)], norms.min()


class TestSolveW:
    def test_orthogonal_users_specialize_for_steep_costs(self):
        # theta = pi/2 crosses the specialization threshold exactly at c = 2:
        # for c = 4 producers split the users, for c = 1 they share the mean
        # direction (threshold angle 2*pi/3 exceeds pi/2).
        specialized = solve_W(4.0, 0.5, two_users(math.pi / 2), 2)
        assert specialized.objective == pytest.approx(0.25**0.25, abs=1e-9)
        assert specialized.certification == EXACT_ENUM
        shared = solve_W(1.0, 0.5, two_users(math.pi / 2), 2)
        assert shared.objective == pytest.approx(0.5 * math.cos(math.pi / 4), abs=1e-9)

    def test_narrow_users_share_direction(self):
        theta = math.pi / 6
        solution = solve_W(1.0, 0.5, two_users(theta), 2)
        assert solution.objective == pytest.approx(0.5 * math.cos(theta / 2), abs=1e-9)

    def test_lower_bound_single_producer_criteria(self):
        rng = rng_stream(10, 2)
        for _ in range(5):
            dist = random_distribution(rng, int(rng.integers(2, 4)), int(rng.integers(2, 5)))
            c = float(rng.uniform(1.0, 4.0))
            beta = float(rng.uniform(0.2, 0.95))
            P = int(rng.integers(1, 4))
            solution = solve_W(c, beta, dist, P)
            _, mean_norm = mean_user(dist)
            assert solution.objective >= beta ** (1 / c) * mean_norm - 1e-9

    def test_solution_is_feasible_and_shares_sum_to_one(self):
        rng = rng_stream(11, 2)
        for _ in range(5):
            dist = random_distribution(rng, 3, 4)
            solution = solve_W(2.0, 0.8, dist, 3)
            assert solution.residuals.max() <= 1e-9
            assert solution.shares.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(solution.shares >= 0)

    def test_objective_capped_by_norm_budget(self):
        rng = rng_stream(12, 2)
        for c in (1.0, 2.0, 4.0, 8.0):
            dist = random_distribution(rng, 3, 4)
            beta = 0.7
            assert solve_W(c, beta, dist, 3).objective <= beta ** (1 / c) + 1e-9

    def test_w_never_exceeds_g(self):
        rng = rng_stream(13, 2)
        for c in (1.0, 2.0, 4.0, 8.0):
            dist = random_distribution(rng, 2, 3)
            w = solve_W(c, 0.8, dist, 2)
            g = solve_G(dist, 2)
            assert w.objective <= g.objective + 1e-9


class TestSolveG:
    def test_enough_producers_saturate(self):
        rng = rng_stream(14, 2)
        for _ in range(3):
            N = int(rng.integers(1, 5))
            dist = random_distribution(rng, int(rng.integers(2, 4)), N)
            solution = solve_G(dist, N + int(rng.integers(0, 3)))
            assert solution.objective == pytest.approx(1.0, abs=1e-9)

    def test_single_atom_point_mass(self):
        dist = UserDistribution(np.array([[0.6, 0.8]]), np.array([1.0]))
        assert solve_G(dist, 1).objective == pytest.approx(1.0, abs=1e-12)

    def test_mean_direction_lower_bound(self):
        rng = rng_stream(15, 2)
        for _ in range(5):
            dist = random_distribution(rng, 3, 5)
            _, mean_norm = mean_user(dist)
            assert solve_G(dist, int(rng.integers(1, 4))).objective >= mean_norm - 1e-9

    def test_nondecreasing_in_producers(self):
        dist = random_distribution(rng_stream(16, 2), 3, 4)
        values = [solve_G(dist, P).objective for P in range(1, 6)]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0, abs=1e-9)

    def test_unit_norm_criteria(self):
        dist = random_distribution(rng_stream(17, 2), 2, 3)
        solution = solve_G(dist, 4)
        np.testing.assert_allclose(np.linalg.norm(solution.criteria, axis=1), 1.0, atol=1e-9)


class TestClosedForm2User:
    def test_threshold_at_c_one(self):
        assert theta_star(1.0) == pytest.approx(2 * math.pi / 3, abs=1e-12)

    def test_large_c_forces_specialization_and_unit_welfare(self):
        value, regime, ts = closed_form_2user(1e6, 0.5, 0.01)
        assert ts < 0.01
        assert regime == SPECIALIZED
        assert value == pytest.approx(1.0, abs=1e-5)

    def test_branches_continuous_at_threshold(self):
        for c in (1.2, 2.0, 3.5):
            ts = theta_star(c)
            for beta in (0.3, 0.9):
                shared = beta ** (1 / c) * math.cos(ts / 2)
                specialized = (beta / 2) ** (1 / c)
                assert shared == pytest.approx(specialized, abs=1e-12)

    def test_regime_labels(self):
        assert closed_form_2user(2.0, 0.5, 0.3)[1] == SHARED_DIRECTION
        assert closed_form_2user(2.0, 0.5, math.pi / 2)[1] == SPECIALIZED

    def test_matches_solver_on_coarse_grid(self):
        for c in (1.0, 2.0):
            for P in (2, 3):
                for theta in np.linspace(0.05, math.pi / 2, 11):
                    solution = solve_W(c, 0.5, two_users(theta), P)
                    value, _, _ = closed_form_2user(c, 0.5, theta)
                    assert solution.objective == pytest.approx(value, abs=1e-6)


class TestMinNormMeet:
    def test_zero_target(self):
        dist = two_users(0.8)
        np.testing.assert_array_equal(min_norm_meet(dist, np.zeros(2)), 0.0)

    def test_single_atom_projection(self):
        u = np.array([0.6, 0.8])
        dist = UserDistribution(u[None, :], np.array([1.0]))
        pbar = np.array([0.2, 0.05])
        expected = float(u @ pbar) * u
        np.testing.assert_allclose(min_norm_meet(dist, pbar), expected, atol=1e-12)
        assert np.linalg.norm(expected) <= np.linalg.norm(pbar) + 1e-12

    def test_coordinate_atoms_pin_target(self):
        dist = UserDistribution(np.eye(2), np.array([0.5, 0.5]))
        pbar = np.array([0.3, 0.4])
        np.testing.assert_allclose(min_norm_meet(dist, pbar), pbar, atol=1e-12)

    def test_matches_grid_oracle(self):
        rng = rng_stream(18, 2)
        for theta in (0.5, math.pi / 3, math.pi / 2):
            dist = two_users(theta)
            pbar = rng.uniform(0.01, 0.06, size=2)
            p = min_norm_meet(dist, pbar)
            _, oracle_norm = grid_min_norm(dist, pbar, hi=0.12)
            assert oracle_norm >= np.linalg.norm(p) - 1e-9  # solver is optimal
            assert abs(np.linalg.norm(p) - oracle_norm) <= 1e-3

    @given(st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_constraints_and_norm_contraction(self, seed):
        rng = rng_stream(seed, 19)
        dist = random_distribution(rng, int(rng.integers(1, 4)), int(rng.integers(1, 5)))
        pbar = rng.uniform(0.0, 1.0, size=dist.dimension)
        p = min_norm_meet(dist, pbar)
        assert np.all(p >= 0)
        assert np.all(dist.atoms @ p >= dist.atoms @ pbar - 1e-9)
        assert np.linalg.norm(p) <= np.linalg.norm(pbar) + 1e-9


class TestScalarBounds:
    def test_values(self):
        assert welfare_upper_bound(1.0, 0.5) == pytest.approx(1.0)
        assert welfare_upper_bound(1e6, 0.5) == pytest.approx(1.0, abs=1e-5)
        assert naive_effort_bound(2.0, 0.9) == pytest.approx(3.0, abs=1e-12)

    def test_rejects_undiscounted(self):
        with pytest.raises(ConfigError):
            welfare_upper_bound(2.0, 1.0)


class TestCriteriaShares:
    def test_all_zero_criteria_split_uniformly(self):
        dist = two_users(0.7)
        objective, f = criteria_shares(dist, np.zeros((3, 2)))
        assert objective == 0.0
        np.testing.assert_allclose(f, 1 / 3, atol=1e-12)
