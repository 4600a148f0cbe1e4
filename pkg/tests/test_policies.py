"""Selection rules, punishment rules, and the bandit estimator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creatorgame import (
    ConfigError,
    PunishHedge,
    PunishLinDirectionHedge,
    PunishUserUtility,
    SelectionDistribution,
    linexp3_estimate,
    linhedge_distribution,
    make_policy,
    rng_stream,
)
from creatorgame.core import UserDistribution
from creatorgame.policies import PolicyState

from helpers import make_config, point_mass, random_unit_direction, two_users


def state_with_scores(scores, active=None):
    scores = np.asarray(scores, dtype=float)
    active = np.ones(scores.shape[0], dtype=bool) if active is None else np.asarray(active)
    return PolicyState(t=1, scores=scores, active=active)


class TestSelectionDistribution:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            SelectionDistribution(np.array([0.5, 0.4]), 0.0)

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="nonnegative"):
            SelectionDistribution(np.array([1.5, -0.5]), 0.0)


class TestLinHedge:
    def test_uniform_at_start(self):
        for P in (2, 3, 5):
            state = state_with_scores(np.zeros((P, 1)))
            dist = linhedge_distribution(state, np.ones(1), eta_t=0.3, gamma=0.1)
            np.testing.assert_allclose(dist.probs, np.full(P, 1.0 / P), atol=1e-15)
            assert dist.none_prob == 0.0

    def test_two_producer_softmax_value(self):
        # eta*<u,S_1> = 1, eta*<u,S_2> = 0, gamma = 0.1:
        # P[1] = 0.9 * e/(e+1) + 0.05, computed directly as the oracle.
        state = state_with_scores([[2.0], [0.0]])
        dist = linhedge_distribution(state, np.ones(1), eta_t=0.5, gamma=0.1)
        expected = 0.9 * math.e / (math.e + 1.0) + 0.05
        assert dist.probs[0] == pytest.approx(expected, abs=1e-12)
        assert dist.probs[1] == pytest.approx(1.0 - expected, abs=1e-12)

    def test_softmax_saturation(self):
        # A huge score gap saturates the softmax at (1-gamma) + gamma/P.
        for gamma, P in [(0.1, 2), (0.3, 4)]:
            scores = np.zeros((P, 1))
            scores[0, 0] = 1e3
            dist = linhedge_distribution(state_with_scores(scores), np.ones(1), 1.0, gamma)
            assert dist.probs[0] == pytest.approx((1 - gamma) + gamma / P, abs=1e-9)

    def test_zero_learning_rate_is_uniform(self):
        state = state_with_scores([[5.0], [1.0], [0.2]])
        dist = linhedge_distribution(state, np.ones(1), eta_t=0.0, gamma=0.2)
        np.testing.assert_allclose(dist.probs, np.full(3, 1 / 3), atol=1e-15)

    @given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_shift_invariance(self, P, D, seed):
        rng = rng_stream(seed, 11)
        scores = np.abs(rng.standard_normal((P, D)))
        shift = np.abs(rng.standard_normal(D))
        user = random_unit_direction(rng, D)
        a = linhedge_distribution(state_with_scores(scores), user, 0.7, 0.15)
        b = linhedge_distribution(state_with_scores(scores + shift), user, 0.7, 0.15)
        np.testing.assert_allclose(a.probs, b.probs, atol=1e-12)


class TestLinExp3Estimate:
    def test_one_dimensional_inverse_weighting(self):
        # Single unit user, symmetric scores: pi_j = 1/2, so the pulled arm's
        # estimate is reward / 0.5 = 2 * reward and the expectation over the
        # arm draw recovers the played content exactly.
        config = make_config(P=2, D=1, T=3, gamma=0.2, eta=0.5)
        state = PolicyState(t=1, scores=np.zeros((2, 1)), active=np.ones(2, dtype=bool))
        reward = 0.37
        est = linexp3_estimate(state, np.ones(1), 0, reward, config)
        assert est[0, 0] == pytest.approx(2.0 * reward, rel=1e-12)
        assert est[1, 0] == 0.0
        assert 0.5 * est[0, 0] == pytest.approx(reward, rel=1e-12)

    def test_unpulled_arm_estimate_is_exactly_zero(self):
        config = make_config(P=3, D=2, T=2, users=two_users(0.8))
        state = PolicyState(t=1, scores=np.zeros((3, 2)), active=np.ones(3, dtype=bool))
        est = linexp3_estimate(state, config.users.atoms[0], 1, 0.4, config)
        assert np.all(est[[0, 2]] == 0.0)

    def test_rank_one_support_projects_out_unseen_coordinate(self):
        # Point-mass user (1,0): the second content coordinate is orthogonal
        # to the support span and must vanish from the estimate.
        users = UserDistribution(np.array([[1.0, 0.0]]), np.array([1.0]))
        config = make_config(P=2, D=2, T=2, gamma=0.2, eta=0.5, users=users)
        state = PolicyState(t=1, scores=np.zeros((2, 2)), active=np.ones(2, dtype=bool))
        content = np.array([0.3, 0.7])
        reward = float(content @ np.array([1.0, 0.0]))
        est = linexp3_estimate(state, np.array([1.0, 0.0]), 0, reward, config)
        pi = 0.5  # symmetric start
        assert est[0, 0] == pytest.approx(0.3 / pi, rel=1e-12)
        assert est[0, 1] == 0.0
        assert pi * est[0, 0] == pytest.approx(0.3, rel=1e-12)

    def test_unclipped_mean_matches_span_projection(self):
        # Monte Carlo replay of one fixed round: the unclipped estimator mean
        # must match the projection of the played content onto the support
        # span within 3 standard errors, per coordinate.
        rng = rng_stream(123, 5)
        users = two_users(0.6)
        config = make_config(P=2, D=2, T=2, gamma=0.2, eta=0.4, users=users)
        state = PolicyState(t=1, scores=np.abs(rng.standard_normal((2, 2))),
                            active=np.ones(2, dtype=bool))
        content = np.array([0.5, 0.25])
        j = 0
        replays = 20_000
        samples = np.zeros((replays, 2))
        from creatorgame.policies import _hedge_probs

        for i in range(replays):
            user = users.atoms[int(rng.random() > users.weights[0])]
            probs = _hedge_probs(state.scores, state.active, user, 0.4, 0.2).probs
            arm = int(rng.random() > probs[0])
            if arm == j:
                reward = float(content @ user)
                samples[i] = linexp3_estimate(state, user, arm, reward, config,
                                              clip=False)[j]
        basis = np.linalg.svd(users.atoms, full_matrices=False)[2]
        projection = basis.T @ (basis @ content)
        mean = samples.mean(axis=0)
        stderr = samples.std(axis=0, ddof=1) / math.sqrt(replays)
        np.testing.assert_array_less(np.abs(mean - projection), 3 * stderr)

    def test_zero_probability_arm_is_internal_error(self):
        config = make_config(P=2, D=1, T=2)
        state = PolicyState(t=1, scores=np.zeros((2, 1)),
                            active=np.array([True, False]))
        with pytest.raises(RuntimeError, match="zero selection probability"):
            linexp3_estimate(state, np.ones(1), 1, 0.5, config)


class TestPunishHedge:
    def test_uniform_over_active(self):
        config = make_config(P=4, T=3)
        policy = PunishHedge(config, q=0.3)
        state = PolicyState(t=2, scores=np.full((4, 1), 0.3),
                            active=np.array([True, True, False, False]))
        dist = policy.distribution(state, np.ones(1))
        np.testing.assert_allclose(dist.probs[:2], [0.5, 0.5], atol=1e-15)
        assert np.all(dist.probs[2:] == 0.0)

    def test_exactly_q_survives(self):
        config = make_config(P=2, T=3)
        policy = PunishHedge(config, q=0.3)
        state = policy.initial_state()
        state = policy.observe(state, np.array([[0.3], [0.2999]]))
        np.testing.assert_array_equal(state.active, [True, False])

    def test_everyone_below_q_empties_active_set(self):
        config = make_config(P=3, T=3)
        policy = PunishHedge(config, q=0.5)
        state = policy.observe(policy.initial_state(), np.full((3, 1), 0.1))
        dist = policy.distribution(state, np.ones(1))
        assert dist.none_prob == 1.0
        assert np.all(dist.probs == 0.0)

    def test_requires_dimension_one(self):
        with pytest.raises(ConfigError, match="dimension 1"):
            PunishHedge(make_config(D=2, users=two_users(0.5)), q=0.1)

    def test_punishment_is_permanent(self):
        config = make_config(P=2, T=4)
        policy = PunishHedge(config, q=0.5)
        state = policy.observe(policy.initial_state(), np.array([[0.1], [0.6]]))
        state = policy.observe(state, np.array([[0.9], [0.6]]))  # recovery attempt
        np.testing.assert_array_equal(state.active, [False, True])


class TestPunishLinDirection:
    def make(self, q=0.4):
        g = np.array([0.6, 0.8])
        config = make_config(P=2, D=2, T=3, users=two_users(0.7))
        return PunishLinDirectionHedge(config, q=q, g=g), g

    def test_threshold_on_direction_survives(self):
        policy, g = self.make()
        state = policy.observe(policy.initial_state(), np.vstack([0.4 * g, 0.4 * g]))
        assert state.active.all()

    def test_direction_mismatch_punished(self):
        policy, g = self.make()
        off = np.array([0.8, 0.6])  # cosine 0.96 against g
        assert off @ g / np.linalg.norm(off) < 1 - 1e-9
        state = policy.observe(policy.initial_state(), np.vstack([0.8 * off / np.linalg.norm(off), 0.4 * g]))
        np.testing.assert_array_equal(state.active, [False, True])

    def test_low_norm_punished(self):
        policy, g = self.make()
        state = policy.observe(policy.initial_state(), np.vstack([0.2 * g, 0.4 * g]))
        np.testing.assert_array_equal(state.active, [False, True])

    def test_zero_vector_punished_by_norm_clause(self):
        policy, g = self.make()
        state = policy.observe(policy.initial_state(), np.vstack([np.zeros(2), 0.4 * g]))
        np.testing.assert_array_equal(state.active, [False, True])

    def test_direction_must_be_unit(self):
        config = make_config(P=2, D=2, users=two_users(0.7))
        with pytest.raises(ConfigError, match="unit norm"):
            PunishLinDirectionHedge(config, q=0.1, g=np.array([1.0, 1.0]))


class TestPunishUserUtility:
    def make(self, criteria):
        config = make_config(P=len(criteria), D=2, T=3, users=two_users(math.pi / 2))
        return PunishUserUtility(config, np.asarray(criteria, dtype=float)), config

    def test_dominant_criterion_wins_outright(self):
        policy, _ = self.make([[0.5, 0.0], [0.1, 0.0]])
        dist = policy.distribution(policy.initial_state(), np.array([1.0, 0.0]))
        np.testing.assert_allclose(dist.probs, [1.0, 0.0], atol=1e-15)

    def test_equal_criteria_split_evenly(self):
        policy, _ = self.make([[0.3, 0.1], [0.3, 0.1]])
        dist = policy.distribution(policy.initial_state(), np.array([1.0, 0.0]))
        np.testing.assert_allclose(dist.probs, [0.5, 0.5], atol=1e-15)

    def test_playing_the_criterion_exactly_is_never_punished(self):
        criteria = np.array([[0.3, 0.2], [0.1, 0.4]])
        policy, _ = self.make(criteria)
        state = policy.observe(policy.initial_state(), criteria.copy())
        assert state.active.all()

    def test_shortfall_on_any_atom_punishes(self):
        criteria = np.array([[0.3, 0.2], [0.1, 0.4]])
        policy, _ = self.make(criteria)
        played = criteria.copy()
        played[0] = [0.5, 0.1]  # beats atom e1, falls short on atom e2
        state = policy.observe(policy.initial_state(), played)
        np.testing.assert_array_equal(state.active, [False, True])

    def test_recommendation_ignores_played_content(self):
        policy, _ = self.make([[0.5, 0.0], [0.1, 0.0]])
        state = policy.observe(policy.initial_state(), np.array([[0.6, 0.6], [9.0, 9.0]]))
        dist = policy.distribution(state, np.array([1.0, 0.0]))
        np.testing.assert_allclose(dist.probs, [1.0, 0.0], atol=1e-15)

    def test_empty_active_set_abstains(self):
        policy, _ = self.make([[0.5, 0.5], [0.5, 0.5]])
        state = policy.observe(policy.initial_state(), np.zeros((2, 2)))
        dist = policy.distribution(state, np.array([1.0, 0.0]))
        assert dist.none_prob == 1.0


class TestFactory:
    def test_names_and_required_params(self):
        config = make_config()
        assert make_policy("linhedge", config).name == "linhedge"
        assert make_policy("linexp3", config).name == "linexp3"
        with pytest.raises(ConfigError, match="requires"):
            make_policy("punishhedge", config)
        with pytest.raises(ConfigError, match="unknown policy"):
            make_policy("ucb", config)
