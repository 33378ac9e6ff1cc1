"""Online and offline learners built on greedy use of MLE estimates.

The online loop: per round, draw a context, draw the first action from
the learner's current policy and the second from the reference policy
(or from a tournament over the learner's own policy for the
tournament variant), observe a Bernoulli preference label from the
ground truth, refit the estimate on all data so far, and rebuild the
policy from the new estimate. Policies are context-indexed functions;
equilibrium policies are solved on demand per context.

Before the first refit every learner acts with the reference policy.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from klpref.core import Instance
from klpref.data import PreferenceDataset
from klpref.errors import NonConvergenceError
from klpref.estimation import (
    EstimatorState,
    GramState,
    OptimizerConfig,
    default_bt_warm_start,
    default_gp_warm_start,
    estimate_phi_ref_mean,
)
from klpref.models import (
    bt_reward_matrix,
    bt_reward_vector,
    gp_preference_matrices,
    gp_preference_matrix,
    preference_prob,
    preference_prob_pairs,
)
from klpref.policies import gibbs_policy, gibbs_policy_rows, nash_fixed_point, nash_fixed_point_batch

ONLINE_ALGORITHMS = ("greedy-gp", "greedy-bt", "optimism-bt", "tournament-gp")
OFFLINE_ALGORITHMS = ("offline-gp", "offline-bt")
GRAM_RIDGE = 1.0
PHI_REF_SAMPLES = 10_000


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str
    eta: float = 1.0
    beta: float = 0.0              # bonus coefficient, optimism only
    tournament_size: int = 1       # candidates per round, tournament only
    refit_every: int = 1
    opt: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.algorithm not in ONLINE_ALGORITHMS + OFFLINE_ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be at least 1")
        if self.refit_every < 1:
            raise ValueError("refit_every must be at least 1")

    @property
    def model_kind(self) -> str:
        return "gp" if self.algorithm.endswith("gp") else "bt"


@dataclass
class RoundLog:
    t: int
    x: np.ndarray
    a1_idx: int
    a2_idx: int
    y: int
    step_regret: float = np.nan


def sample_index(rng: np.random.Generator, probs: np.ndarray) -> int:
    """Inverse-CDF draw consuming exactly one uniform."""
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, probs.shape[0] - 1)


def init_estimator(
    instance: Instance, cfg: LearnerConfig, phi_ref_seed: Optional[int] = None
) -> EstimatorState:
    """Fresh estimator with the default warm start; Gram state only for
    the optimism variant."""
    kind = cfg.model_kind
    params = (
        default_gp_warm_start(instance.k)
        if kind == "gp"
        else default_bt_warm_start(instance.k)
    )
    gram = None
    if cfg.algorithm == "optimism-bt":
        if phi_ref_seed is None:
            raise ValueError("optimism-bt needs a phi_ref_seed for the feature mean")
        mean = estimate_phi_ref_mean(instance, phi_ref_seed, PHI_REF_SAMPLES)
        gram = GramState(lam=GRAM_RIDGE, phi_ref_mean=mean)
    return EstimatorState(kind=kind, params=params, opt=cfg.opt, gram=gram)


# ---------------------------------------------------------------------------
# Policy construction from estimates
# ---------------------------------------------------------------------------


def greedy_gp_policy(est: EstimatorState, instance: Instance, x, eta: float) -> np.ndarray:
    """Equilibrium policy of the estimated preference model at context x.

    An estimator that has seen no data yields the reference policy.
    """
    if est.n_obs == 0:
        return instance.ref_policy.copy()
    q = gp_preference_matrix(est.params, x, instance.actions)
    return nash_fixed_point(q, instance.ref_policy, eta)


def greedy_bt_policy(est: EstimatorState, instance: Instance, x, eta: float) -> np.ndarray:
    """Gibbs tilt of the reference by the estimated rewards at context x."""
    if est.n_obs == 0:
        return instance.ref_policy.copy()
    return gibbs_policy(bt_reward_vector(est.params, x, instance.actions), instance.ref_policy, eta)


def optimism_bt_policy(
    est: EstimatorState, instance: Instance, x, eta: float, beta: float
) -> np.ndarray:
    """Gibbs tilt by estimated rewards plus the elliptical bonus."""
    if est.n_obs == 0:
        return instance.ref_policy.copy()
    r = bt_reward_vector(est.params, x, instance.actions)
    bonuses = np.array(
        [est.gram.bonus(x, a, beta) for a in instance.actions]
    )
    return gibbs_policy(r + bonuses, instance.ref_policy, eta)


def tournament_winner(qhat: np.ndarray, candidates, rng_unused=None) -> int:
    """Single-elimination survivor over candidates in draw order.

    The earlier-drawn candidate survives a comparison unless the
    estimated probability that it beats the challenger falls below 1/2
    (ties keep the earlier draw).
    """
    winner = candidates[0]
    for ci in candidates[1:]:
        if qhat[winner, ci] < 0.5:
            winner = ci
    return int(winner)


def tournament_select(
    est: EstimatorState,
    instance: Instance,
    x,
    proposer: np.ndarray,
    size: int,
    rng: np.random.Generator,
) -> int:
    """Draw ``size`` candidates i.i.d. from the proposer and return the
    survivor under the current estimate's pairwise comparisons."""
    candidates = [sample_index(rng, proposer) for _ in range(size)]
    if size == 1:
        return candidates[0]
    qhat = gp_preference_matrix(est.params, x, instance.actions)
    return tournament_winner(qhat, candidates)


def policy_matrix_fn(
    est: EstimatorState, instance: Instance, cfg: LearnerConfig
) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized policy over a batch of contexts for the current estimate.

    Used by the evaluator; must agree with the per-context policy
    functions above (it runs the same kernels batched).
    """
    ref = instance.ref_policy
    eta = cfg.eta

    if est.n_obs == 0:
        def refpol(X):
            return np.tile(ref, (X.shape[0], 1))
        return refpol

    if cfg.model_kind == "gp":
        params = est.params.copy()

        def gp_pol(X):
            Qs = gp_preference_matrices(params, X, instance.actions)
            Pi, residuals, _, ok = nash_fixed_point_batch(Qs, ref, eta)
            if not np.all(ok):
                raise NonConvergenceError(float(residuals[~ok].max()), 10_000)
            return Pi

        return gp_pol

    params = est.params.copy()
    if cfg.algorithm == "optimism-bt" and cfg.beta > 0.0:
        gram = est.gram

        def opt_pol(X):
            R = bt_reward_matrix(params, X, instance.actions)
            Phi = (
                X[:, None, :, None] * instance.actions[None, :, None, :]
            ).reshape(X.shape[0] * instance.n_actions, -1)
            bonus = gram.bonus_many(Phi, cfg.beta).reshape(X.shape[0], -1)
            return gibbs_policy_rows(R + bonus, ref, eta)

        return opt_pol

    def bt_pol(X):
        R = bt_reward_matrix(params, X, instance.actions)
        return gibbs_policy_rows(R, ref, eta)

    return bt_pol


# ---------------------------------------------------------------------------
# Online loop
# ---------------------------------------------------------------------------


def run_online(
    instance: Instance,
    cfg: LearnerConfig,
    T: int,
    seed: int,
    evaluator=None,
    eval_every: int = 1,
    phi_ref_seed: Optional[int] = None,
    context_seed: Optional[int] = None,
) -> Tuple[List[RoundLog], List[EstimatorState]]:
    """Run one seeded online trajectory for T rounds.

    ``evaluator``, when given, maps a batched policy function to the step
    regret of the acting policy; it is invoked on rounds divisible by
    ``eval_every`` before the round's refit, and its value is cached
    while the acting policy is unchanged. Returns the per-round logs and
    the estimator snapshots taken at each refit.

    Contexts come from their own stream (``context_seed``; defaults to
    the run seed) so that learners sharing a context seed face the same
    context sequence regardless of how many action draws they consume.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if cfg.algorithm not in ONLINE_ALGORITHMS:
        raise ValueError(f"{cfg.algorithm!r} is not an online algorithm")
    rng = np.random.default_rng(seed)
    ctx_rng = np.random.default_rng(seed if context_seed is None else context_seed)
    if phi_ref_seed is None:
        phi_ref_seed = seed
    est = init_estimator(instance, cfg, phi_ref_seed)
    dataset = PreferenceDataset.empty(instance.k, capacity=T)
    logs: List[RoundLog] = []
    snapshots: List[EstimatorState] = []

    policy_version = 0
    cached_version = -1
    cached_step = np.nan
    batch_fn = policy_matrix_fn(est, instance, cfg)

    for t in range(1, T + 1):
        x = instance.sample_context(ctx_rng)
        pi1 = batch_fn(x[None, :])[0]
        a1 = sample_index(rng, pi1)
        if cfg.algorithm == "tournament-gp":
            a2 = tournament_select(est, instance, x, pi1, cfg.tournament_size, rng)
        else:
            a2 = sample_index(rng, instance.ref_policy)
        p_true = preference_prob(
            instance.params, x, instance.actions[a1], instance.actions[a2]
        )
        y = 1 if rng.random() < p_true else 0
        dataset.append(x, a1, a2, y)
        log = RoundLog(t=t, x=x, a1_idx=a1, a2_idx=a2, y=y)

        if evaluator is not None and t % eval_every == 0:
            if cached_version != policy_version:
                cached_step = evaluator(batch_fn)
                cached_version = policy_version
            log.step_regret = cached_step
        logs.append(log)

        if est.gram is not None:
            est.gram.update(x, instance.actions[a1])
            policy_version += 1
        if t % cfg.refit_every == 0:
            est.refit(dataset, instance.actions)
            snapshots.append(est.snapshot())
            policy_version += 1
            batch_fn = policy_matrix_fn(est, instance, cfg)
        elif est.gram is not None:
            batch_fn = policy_matrix_fn(est, instance, cfg)

    return logs, snapshots


# ---------------------------------------------------------------------------
# Offline learning
# ---------------------------------------------------------------------------


def generate_offline_dataset(
    instance: Instance, m: int, rng: np.random.Generator
) -> PreferenceDataset:
    """Pre-collected data: both actions from the reference policy, labels
    from the ground truth."""
    X = instance.context_dist.sample(rng, m)
    cdf = np.cumsum(instance.ref_policy)
    a1 = np.minimum(
        np.searchsorted(cdf, rng.random(m), side="right"), instance.n_actions - 1
    ).astype(np.int64)
    a2 = np.minimum(
        np.searchsorted(cdf, rng.random(m), side="right"), instance.n_actions - 1
    ).astype(np.int64)
    probs = preference_prob_pairs(instance.params, X, instance.actions, a1, a2)
    y = (rng.random(m) < probs).astype(np.int64)
    return PreferenceDataset.from_arrays(X, a1, a2, y)


def run_offline(
    instance: Instance, cfg: LearnerConfig, m: int, seed: int
) -> Tuple[Callable[[np.ndarray], np.ndarray], EstimatorState]:
    """Fit once on m generated records and return the greedy policy.

    The returned handle maps a single context to an action distribution;
    the estimator state rides along for inspection.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if cfg.algorithm not in OFFLINE_ALGORITHMS:
        raise ValueError(f"{cfg.algorithm!r} is not an offline algorithm")
    rng = np.random.default_rng(seed)
    dataset = generate_offline_dataset(instance, m, rng)
    est = init_estimator(instance, cfg)
    est.refit(dataset, instance.actions)

    if cfg.model_kind == "gp":
        def policy(x):
            return greedy_gp_policy(est, instance, x, cfg.eta)
    else:
        def policy(x):
            return greedy_bt_policy(est, instance, x, cfg.eta)

    return policy, est
