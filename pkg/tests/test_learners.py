"""Online and offline learners."""

import math

import numpy as np
import pytest

from klpref.core import make_instance, uniform_policy
from klpref.estimation import EstimatorState, OptimizerConfig
from klpref.evaluation import build_eval_context_set, delta_bt, delta_gp, step_evaluator
from klpref.learners import (
    LearnerConfig,
    generate_offline_dataset,
    greedy_bt_policy,
    greedy_gp_policy,
    init_estimator,
    optimism_bt_policy,
    policy_matrix_fn,
    run_offline,
    run_online,
    sample_index,
    tournament_select,
    tournament_winner,
)
from klpref.models import bt_reward_vector
from klpref.policies import gibbs_policy


def fitted_state(kind, params, n_obs=1):
    return EstimatorState(kind=kind, params=np.asarray(params, dtype=float), n_obs=n_obs)


class TestPolicyBuilders:
    def test_unfitted_estimators_act_with_reference(self):
        for variant, builder in (("gp", greedy_gp_policy), ("bt", greedy_bt_policy)):
            inst = make_instance(variant=variant, seed=1)
            est = init_estimator(inst, LearnerConfig(algorithm=f"greedy-{variant}"))
            x = np.random.default_rng(0).random(inst.k)
            np.testing.assert_array_equal(builder(est, inst, x, inst.eta), inst.ref_policy)

    def test_constant_preference_estimate_returns_reference(self):
        inst = make_instance(variant="gp", seed=2)
        est = fitted_state("gp", np.full((inst.k,) * 3, 0.7))
        x = np.random.default_rng(1).random(inst.k)
        pi = greedy_gp_policy(est, inst, x, inst.eta)
        np.testing.assert_allclose(pi, inst.ref_policy, atol=1e-12)

    def test_greedy_gp_with_truth_is_near_equilibrium(self):
        inst = make_instance(variant="gp", seed=3)
        ctxs = build_eval_context_set(inst, 50, seed=5)
        est = fitted_state("gp", inst.params.tensor)
        gap = delta_gp(lambda x: greedy_gp_policy(est, inst, x, inst.eta), inst, ctxs)
        assert abs(gap) < 1e-6

    def test_greedy_bt_with_truth_is_optimal(self):
        inst = make_instance(variant="bt", seed=4)
        ctxs = build_eval_context_set(inst, 50, seed=6)
        est = fitted_state("bt", inst.params.matrix)
        gap = delta_bt(lambda x: greedy_bt_policy(est, inst, x, inst.eta), inst, ctxs)
        assert abs(gap) < 1e-10

    def test_greedy_bt_two_point_softmax(self):
        inst = make_instance(variant="bt", seed=5, n_actions=2)
        est = fitted_state("bt", inst.params.matrix)
        rng = np.random.default_rng(2)
        for _ in range(10):
            x = rng.random(inst.k)
            r = bt_reward_vector(est.params, x, inst.actions)
            expected = gibbs_policy(r, inst.ref_policy, inst.eta)
            np.testing.assert_allclose(
                greedy_bt_policy(est, inst, x, inst.eta), expected, atol=1e-15
            )

    def test_optimism_reduces_to_greedy_at_zero_beta(self):
        inst = make_instance(variant="bt", seed=6)
        cfg = LearnerConfig(algorithm="optimism-bt", beta=0.0)
        est = init_estimator(inst, cfg, phi_ref_seed=9)
        est.params = inst.params.matrix.copy()
        est.n_obs = 5
        x = np.random.default_rng(3).random(inst.k)
        np.testing.assert_array_equal(
            optimism_bt_policy(est, inst, x, inst.eta, beta=0.0),
            greedy_bt_policy(est, inst, x, inst.eta),
        )

    def test_fresh_gram_boosts_large_feature_actions(self):
        # On a fresh identity Gram the bonus is beta * ||phi - mean||, so
        # the action with the larger centered feature gains probability
        # relative to greedy.
        inst = make_instance(variant="bt", seed=7, n_actions=2)
        cfg = LearnerConfig(algorithm="optimism-bt", beta=0.5)
        est = init_estimator(inst, cfg, phi_ref_seed=11)
        est.params = inst.params.matrix.copy()
        est.n_obs = 1
        x = np.full(inst.k, 0.9)
        norms = [
            est.gram.bonus(x, inst.actions[a], 1.0) for a in range(2)
        ]
        bigger = int(np.argmax(norms))
        greedy = greedy_bt_policy(est, inst, x, inst.eta)
        optimistic = optimism_bt_policy(est, inst, x, inst.eta, beta=0.5)
        assert optimistic[bigger] > greedy[bigger]

    def test_policy_matrix_fn_matches_pointwise_builders(self):
        for variant in ("gp", "bt"):
            inst = make_instance(variant=variant, seed=8)
            cfg = LearnerConfig(algorithm=f"greedy-{variant}")
            est = init_estimator(inst, cfg)
            est.params = (
                inst.params.tensor.copy() if variant == "gp" else inst.params.matrix.copy()
            )
            est.n_obs = 3
            X = np.random.default_rng(4).random((9, inst.k))
            batch = policy_matrix_fn(est, inst, cfg)(X)
            builder = greedy_gp_policy if variant == "gp" else greedy_bt_policy
            for e, x in enumerate(X):
                np.testing.assert_allclose(
                    batch[e], builder(est, inst, x, cfg.eta), rtol=0, atol=1e-12
                )


class TestTournament:
    def test_single_candidate_distribution_equals_proposer(self):
        inst = make_instance(variant="gp", seed=9)
        est = init_estimator(inst, LearnerConfig(algorithm="tournament-gp"))
        rng = np.random.default_rng(5)
        proposer = np.array([0.5, 0.2, 0.1, 0.1, 0.05, 0.05])
        counts = np.zeros(6)
        for _ in range(20_000):
            counts[tournament_select(est, inst, inst.actions[0], proposer, 1, rng)] += 1
        np.testing.assert_allclose(counts / counts.sum(), proposer, atol=0.01)

    def test_indifferent_estimate_keeps_first_draw(self):
        # All comparisons tie, so the winner is always the first
        # candidate: the output distribution equals the proposer.
        qhat = np.full((4, 4), 0.5)
        rng = np.random.default_rng(6)
        for _ in range(200):
            cands = list(rng.integers(0, 4, size=3))
            assert tournament_winner(qhat, cands) == cands[0]

    def test_ladder_elimination_order(self):
        # Action 2 beats everything; 1 beats 0. Draw order (0, 1, 2):
        # 0 vs 1 -> 1, then 1 vs 2 -> 2.
        qhat = np.array(
            [
                [0.5, 0.2, 0.1],
                [0.8, 0.5, 0.3],
                [0.9, 0.7, 0.5],
            ]
        )
        assert tournament_winner(qhat, [0, 1, 2]) == 2
        assert tournament_winner(qhat, [1, 0, 0]) == 1
        assert tournament_winner(qhat, [2, 1, 0]) == 2

    def test_three_candidate_win_rate_matches_enumeration(self):
        # Two actions with hat-P(a0 beats a1) = 0.9 > 1/2: the stronger
        # action wins unless all three draws miss it, so
        # P(win = a0) = 1 - q1^3 by exhaustive enumeration of draws.
        inst = make_instance(variant="gp", seed=10, n_actions=2)
        est = init_estimator(inst, LearnerConfig(algorithm="tournament-gp"))
        est.n_obs = 1
        q = np.array([[0.5, 0.9], [0.1, 0.5]])
        proposer = np.array([0.3, 0.7])
        rng = np.random.default_rng(7)
        wins = 0
        trials = 100_000
        for _ in range(trials):
            cands = [sample_index(rng, proposer) for _ in range(3)]
            if tournament_winner(q, cands) == 0:
                wins += 1
        expected = 1.0 - proposer[1] ** 3
        assert wins / trials == pytest.approx(expected, abs=0.01)


class TestRunOnline:
    def test_minimal_run_logs_one_round_from_reference(self):
        inst = make_instance(variant="bt", seed=11)
        logs, snaps = run_online(inst, LearnerConfig(algorithm="greedy-bt"), 1, seed=1)
        assert len(logs) == 1
        assert logs[0].t == 1
        assert len(snaps) == 1
        assert snaps[0].n_obs == 1

    def test_same_seed_reproduces_bitwise(self):
        inst = make_instance(variant="gp", seed=12)
        cfg = LearnerConfig(algorithm="greedy-gp")
        a = run_online(inst, cfg, 40, seed=3)[0]
        b = run_online(inst, cfg, 40, seed=3)[0]
        for la, lb in zip(a, b):
            assert (la.t, la.a1_idx, la.a2_idx, la.y) == (lb.t, lb.a1_idx, lb.a2_idx, lb.y)
            np.testing.assert_array_equal(la.x, lb.x)

    def test_optimism_beta_zero_is_bitwise_greedy(self):
        inst = make_instance(variant="bt", seed=13)
        greedy = run_online(inst, LearnerConfig(algorithm="greedy-bt"), 60, seed=5)[0]
        opt = run_online(
            inst, LearnerConfig(algorithm="optimism-bt", beta=0.0), 60, seed=5,
            phi_ref_seed=5,
        )[0]
        for lg, lo in zip(greedy, opt):
            assert (lg.a1_idx, lg.a2_idx, lg.y) == (lo.a1_idx, lo.a2_idx, lo.y)
            np.testing.assert_array_equal(lg.x, lo.x)

    def test_data_accumulation_matches_round_index(self):
        inst = make_instance(variant="bt", seed=14)
        _, snaps = run_online(inst, LearnerConfig(algorithm="greedy-bt"), 25, seed=6)
        assert [s.n_obs for s in snaps] == list(range(1, 26))

    def test_refit_every_controls_snapshot_cadence(self):
        inst = make_instance(variant="bt", seed=14)
        _, snaps = run_online(
            inst, LearnerConfig(algorithm="greedy-bt", refit_every=5), 23, seed=6
        )
        assert [s.n_obs for s in snaps] == [5, 10, 15, 20]

    def test_every_policy_stays_in_the_ratio_class(self):
        # Snapshot estimates rebuild each round's acting policy; all of
        # them must stay within exp(+-eta * payoff_range) of the
        # reference, with the optimism payoff widened by its bonus.
        rng = np.random.default_rng(8)
        probes = rng.random((25, 5))
        for algo, beta in (("greedy-bt", 0.0), ("optimism-bt", 0.3), ("greedy-gp", 0.0)):
            variant = "bt" if algo.endswith("bt") else "gp"
            inst = make_instance(variant=variant, seed=15)
            cfg = LearnerConfig(algorithm=algo, beta=beta)
            _, snaps = run_online(inst, cfg, 30, seed=7, phi_ref_seed=7)
            for snap in snaps[::7]:
                fn = policy_matrix_fn(snap, inst, cfg)
                for x in probes:
                    pi = fn(x[None, :])[0]
                    if variant == "gp":
                        payoff_range = 1.0  # preference probabilities
                    else:
                        r = bt_reward_vector(snap.params, x, inst.actions)
                        if beta > 0.0:
                            r = r + np.array(
                                [snap.gram.bonus(x, a, beta) for a in inst.actions]
                            )
                        payoff_range = float(r.max() - r.min())
                    bound = math.exp(inst.eta * payoff_range) + 1e-10
                    ratio = pi / inst.ref_policy
                    assert np.all(ratio <= bound)
                    assert np.all(ratio >= 1.0 / bound)

    def test_evaluator_receives_reference_policy_first(self):
        inst = make_instance(variant="bt", seed=16)
        ctxs = build_eval_context_set(inst, 20, seed=8)
        seen = []

        def evaluator(batch_fn):
            seen.append(batch_fn(ctxs.contexts))
            return 0.0

        run_online(inst, LearnerConfig(algorithm="greedy-bt"), 3, seed=9, evaluator=evaluator)
        np.testing.assert_array_equal(seen[0], np.tile(inst.ref_policy, (20, 1)))

    def test_eval_every_thins_step_regrets(self):
        inst = make_instance(variant="bt", seed=16)
        ctxs = build_eval_context_set(inst, 10, seed=8)
        ev = step_evaluator(ctxs)
        logs, _ = run_online(
            inst, LearnerConfig(algorithm="greedy-bt"), 10, seed=9,
            evaluator=ev, eval_every=3,
        )
        evaluated = [log.t for log in logs if not np.isnan(log.step_regret)]
        assert evaluated == [3, 6, 9]

    def test_shared_context_stream_aligns_learners(self):
        inst = make_instance(variant="bt", seed=17)
        a = run_online(
            inst, LearnerConfig(algorithm="greedy-bt"), 12, seed=1, context_seed=42
        )[0]
        b = run_online(
            inst, LearnerConfig(algorithm="optimism-bt", beta=0.4), 12, seed=2,
            phi_ref_seed=3, context_seed=42,
        )[0]
        for la, lb in zip(a, b):
            np.testing.assert_array_equal(la.x, lb.x)


class TestRunOffline:
    def test_large_sample_bt_is_near_optimal(self):
        inst = make_instance(variant="bt", seed=18)
        ctxs = build_eval_context_set(inst, 100, seed=10)
        policy, est = run_offline(
            inst, LearnerConfig(algorithm="offline-bt"), 100_000, seed=11
        )
        assert est.n_obs == 100_000
        assert delta_bt(policy, inst, ctxs) < 0.01

    def test_single_record_still_yields_a_policy(self):
        inst = make_instance(variant="gp", seed=19)
        policy, est = run_offline(inst, LearnerConfig(algorithm="offline-gp"), 1, seed=12)
        x = np.random.default_rng(13).random(inst.k)
        pi = policy(x)
        assert pi.shape == (inst.n_actions,)
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(pi >= 0.0)

    def test_truth_warm_start_with_zero_budget_is_optimal(self):
        inst = make_instance(variant="gp", seed=20)
        ctxs = build_eval_context_set(inst, 50, seed=14)
        cfg = LearnerConfig(algorithm="offline-gp", opt=OptimizerConfig(max_iter=0))
        rng = np.random.default_rng(15)
        data = generate_offline_dataset(inst, 5, rng)
        est = init_estimator(inst, cfg)
        est.params = inst.params.tensor.copy()
        est.refit(data, inst.actions)
        np.testing.assert_array_equal(est.params, inst.params.tensor)
        gap = delta_gp(
            lambda x: greedy_gp_policy(est, inst, x, cfg.eta), inst, ctxs
        )
        assert abs(gap) < 1e-6

    def test_rejects_bad_arguments(self):
        inst = make_instance(variant="bt", seed=21)
        with pytest.raises(ValueError):
            run_offline(inst, LearnerConfig(algorithm="offline-bt"), 0, seed=1)
        with pytest.raises(ValueError):
            run_offline(inst, LearnerConfig(algorithm="greedy-bt"), 5, seed=1)
        with pytest.raises(ValueError):
            run_online(inst, LearnerConfig(algorithm="offline-bt"), 5, seed=1)


class TestSampling:
    def test_inverse_cdf_hits_expected_frequencies(self):
        rng = np.random.default_rng(16)
        probs = np.array([0.5, 0.3, 0.2])
        counts = np.zeros(3)
        for _ in range(30_000):
            counts[sample_index(rng, probs)] += 1
        np.testing.assert_allclose(counts / counts.sum(), probs, atol=0.01)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LearnerConfig(algorithm="nonsense")
        with pytest.raises(ValueError):
            LearnerConfig(algorithm="greedy-bt", beta=-0.1)
        with pytest.raises(ValueError):
            LearnerConfig(algorithm="tournament-gp", tournament_size=0)
        with pytest.raises(ValueError):
            LearnerConfig(algorithm="greedy-bt", refit_every=0)
