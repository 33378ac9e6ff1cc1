"""Preference probability and reward models."""

import numpy as np
import pytest

from klpref.core import BTParams, GPParams, make_instance
from klpref.errors import DegeneratePairError
from klpref.models import (
    bt_preference_matrix,
    bt_preference_prob,
    bt_reward,
    bt_reward_matrix,
    bt_reward_vector,
    gp_preference_matrices,
    gp_preference_matrix,
    gp_preference_prob,
    preference_prob_pairs,
    sigmoid,
)


class TestGPPreference:
    def test_hand_evaluated_ratio(self):
        # x = e_0 picks the first tensor slice, so (x M) = [[1, 2], [3, 4]].
        # a1 = e_0, a2 = e_1 give scores s1 = 2, s2 = 3 and 2/(2+3) = 0.4.
        M = np.zeros((2, 2, 2))
        M[0] = [[1.0, 2.0], [3.0, 4.0]]
        M[1] = [[5.0, 6.0], [7.0, 8.0]]
        p = gp_preference_prob(M, [1.0, 0.0], [1.0, 0.0], [0.0, 1.0])
        assert p == pytest.approx(0.4, abs=1e-15)

    def test_same_action_is_a_coin_flip(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            M = rng.random((3, 3, 3))
            x = rng.random(3)
            a = rng.random(3)
            assert gp_preference_prob(M, x, a, a) == 0.5

    def test_antisymmetry_exact(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            M = rng.random((4, 4, 4))
            x = rng.random(4)
            a1 = rng.random(4)
            a2 = rng.random(4)
            total = gp_preference_prob(M, x, a1, a2) + gp_preference_prob(M, x, a2, a1)
            assert total == 1.0

    def test_degenerate_pair_raises(self):
        M = np.zeros((2, 2, 2))
        with pytest.raises(DegeneratePairError):
            gp_preference_prob(M, [1.0, 0.0], [1.0, 0.0], [0.0, 1.0])

    def test_matrix_agrees_with_scalar(self):
        inst = make_instance(variant="gp", seed=5)
        rng = np.random.default_rng(2)
        x = rng.random(inst.k)
        Q = gp_preference_matrix(inst.params.tensor, x, inst.actions)
        for a in range(inst.n_actions):
            for b in range(inst.n_actions):
                expected = gp_preference_prob(
                    inst.params.tensor, x, inst.actions[a], inst.actions[b]
                )
                assert Q[a, b] == pytest.approx(expected, abs=1e-12)
        assert np.all(Q + Q.T == 1.0)

    def test_batched_matrices_match_single(self):
        inst = make_instance(variant="gp", seed=6)
        X = np.random.default_rng(3).random((7, inst.k))
        Qs = gp_preference_matrices(inst.params.tensor, X, inst.actions)
        for e, x in enumerate(X):
            np.testing.assert_allclose(
                Qs[e], gp_preference_matrix(inst.params.tensor, x, inst.actions),
                rtol=0, atol=1e-14,
            )


class TestBTModel:
    def test_reward_is_the_bilinear_form(self):
        rng = np.random.default_rng(4)
        W = rng.random((5, 5))
        x = rng.random(5)
        a = rng.random(5)
        direct = sum(x[i] * W[i, j] * a[j] for i in range(5) for j in range(5))
        assert bt_reward(W, x, a) == pytest.approx(direct, rel=1e-12)

    def test_zero_map_and_zero_context(self):
        rng = np.random.default_rng(5)
        x = rng.random(4)
        a = rng.random(4)
        assert bt_reward(np.zeros((4, 4)), x, a) == 0.0
        assert bt_reward(rng.random((4, 4)), np.zeros(4), a) == 0.0

    def test_identical_actions_give_half(self):
        rng = np.random.default_rng(6)
        W = rng.random((3, 3))
        x = rng.random(3)
        a = rng.random(3)
        assert bt_preference_prob(W, x, a, a) == 0.5

    def test_unit_reward_difference(self):
        # sigma(1) = 1 / (1 + e^-1)
        W = np.eye(2)
        p = bt_preference_prob(W, [1.0, 0.0], [1.0, 0.0], [0.0, 0.0])
        assert p == pytest.approx(0.7310585786300049, abs=1e-15)

    def test_complement_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            W = rng.random((4, 4))
            x = rng.random(4)
            a1 = rng.random(4)
            a2 = rng.random(4)
            assert bt_preference_prob(W, x, a1, a2) + bt_preference_prob(W, x, a2, a1) == 1.0

    def test_preference_matrix_antisymmetry(self):
        inst = make_instance(variant="bt", seed=8)
        x = np.random.default_rng(8).random(inst.k)
        Q = bt_preference_matrix(inst.params.matrix, x, inst.actions)
        assert np.all(Q + Q.T == 1.0)

    def test_reward_matrix_batches(self):
        inst = make_instance(variant="bt", seed=9)
        X = np.random.default_rng(9).random((6, inst.k))
        R = bt_reward_matrix(inst.params.matrix, X, inst.actions)
        for e, x in enumerate(X):
            np.testing.assert_allclose(
                R[e], bt_reward_vector(inst.params.matrix, x, inst.actions),
                rtol=0, atol=1e-14,
            )


class TestSigmoid:
    def test_exact_complement_over_wide_range(self):
        z = np.random.default_rng(10).uniform(-40, 40, 5000)
        np.testing.assert_array_equal(sigmoid(z) + sigmoid(-z), np.ones_like(z))

    def test_known_values(self):
        assert sigmoid(0.0) == 0.5
        assert sigmoid(1.0) == pytest.approx(0.7310585786300049, abs=1e-16)
        assert sigmoid(-1.0) == pytest.approx(0.2689414213699951, abs=1e-16)


class TestVectorizedPairProbs:
    @pytest.mark.parametrize("variant", ["gp", "bt"])
    def test_matches_scalar_path(self, variant):
        inst = make_instance(variant=variant, seed=12)
        rng = np.random.default_rng(11)
        X = rng.random((50, inst.k))
        a1 = rng.integers(0, inst.n_actions, 50)
        a2 = rng.integers(0, inst.n_actions, 50)
        probs = preference_prob_pairs(inst.params, X, inst.actions, a1, a2)
        for i in range(50):
            if variant == "gp":
                expected = gp_preference_prob(
                    inst.params.tensor, X[i], inst.actions[a1[i]], inst.actions[a2[i]]
                )
            else:
                expected = bt_preference_prob(
                    inst.params.matrix, X[i], inst.actions[a1[i]], inst.actions[a2[i]]
                )
            assert probs[i] == pytest.approx(expected, abs=1e-12)


class TestParamValidation:
    def test_gp_rejects_negative_entries(self):
        M = np.full((2, 2, 2), 0.5)
        M[0, 0, 0] = -0.1
        with pytest.raises(ValueError):
            GPParams(M)

    def test_bt_rejects_out_of_box(self):
        with pytest.raises(ValueError):
            BTParams(np.full((3, 3), 1.5))
        with pytest.raises(ValueError):
            BTParams(-np.ones((3, 3)))
