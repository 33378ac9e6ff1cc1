"""Exact value computation, suboptimality gaps, and coverage.

Expectations over contexts are Monte Carlo averages over a context set
drawn once and shared across learners; expectations over the finite
action set are exact sums. The inner minimization of the preference-game
gap decomposes per context and is solved exactly by the closed-form best
response, so gaps carry no optimization noise.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from klpref.core import FiniteContexts, Instance
from klpref.data import PreferenceDataset
from klpref.errors import ContinuousContextError, NonConvergenceError, RegretAnomalyError
from klpref.models import bt_reward_matrix, gp_preference_matrices
from klpref.policies import (
    gibbs_policy_rows,
    kl_divergence_rows,
    nash_fixed_point_batch,
)

# Step regrets below these are treated as broken oracles, not noise.
NEGATIVE_REGRET_TOL = {"gp": 1e-9, "bt": 1e-12}

PolicyMatrixFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class EvalContextSet:
    """Fixed evaluation contexts with per-context ground-truth caches.

    For the preference variant the cache holds the pairwise truth
    matrices, the equilibrium policy, and its game value per context; for
    the reward variant, the reward rows, the optimal Gibbs policy, and
    its value. The instance fingerprint keys the cache.
    """

    contexts: np.ndarray
    eta: float
    ref: np.ndarray
    actions: np.ndarray
    variant: str
    instance_fingerprint: str
    q_true: Optional[np.ndarray] = None
    r_true: Optional[np.ndarray] = None
    pi_star: Optional[np.ndarray] = None
    j_star: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.contexts.shape[0]

    @property
    def j_star_mean(self) -> float:
        return float(self.j_star.mean())


def build_eval_context_set(
    instance: Instance, n_contexts: int, seed: int
) -> EvalContextSet:
    """Draw the evaluation contexts once and precompute truth caches.

    A finite context distribution contributes its explicit list instead
    of fresh draws.
    """
    if isinstance(instance.context_dist, FiniteContexts):
        contexts = instance.context_dist.contexts.copy()
    else:
        rng = np.random.default_rng(seed)
        contexts = instance.context_dist.sample(rng, n_contexts)
    eta = instance.eta
    ref = instance.ref_policy
    if instance.variant == "gp":
        q_true = gp_preference_matrices(instance.params.tensor, contexts, instance.actions)
        pi_star, residuals, _, ok = nash_fixed_point_batch(q_true, ref, eta)
        if not np.all(ok):
            raise NonConvergenceError(float(residuals[~ok].max()), 10_000)
        j_star = _game_values(q_true, pi_star, pi_star, ref, eta)
        return EvalContextSet(
            contexts=contexts,
            eta=eta,
            ref=ref,
            actions=instance.actions,
            variant="gp",
            instance_fingerprint=instance.fingerprint(),
            q_true=q_true,
            pi_star=pi_star,
            j_star=j_star,
        )
    r_true = bt_reward_matrix(instance.params.matrix, contexts, instance.actions)
    pi_star = gibbs_policy_rows(r_true, ref, eta)
    j_star = _reward_values(r_true, pi_star, ref, eta)
    return EvalContextSet(
        contexts=contexts,
        eta=eta,
        ref=ref,
        actions=instance.actions,
        variant="bt",
        instance_fingerprint=instance.fingerprint(),
        r_true=r_true,
        pi_star=pi_star,
        j_star=j_star,
    )


def _game_values(Qs, Pi1, Pi2, ref, eta) -> np.ndarray:
    """Per-context regularized game value of a policy pair."""
    win = np.einsum("ea,eab,eb->e", Pi1, Qs, Pi2)
    kl1 = kl_divergence_rows(Pi1, ref)
    kl2 = kl_divergence_rows(Pi2, ref)
    return win - kl1 / eta + kl2 / eta


def _reward_values(Rs, Pi, ref, eta) -> np.ndarray:
    """Per-context regularized reward value of a policy."""
    return np.einsum("ea,ea->e", Pi, Rs) - kl_divergence_rows(Pi, ref) / eta


def _policy_matrix(policy_fn, contexts) -> np.ndarray:
    return np.stack([np.asarray(policy_fn(x), dtype=np.float64) for x in contexts])


def value_gp(pref_matrix_fn, pi1_fn, pi2_fn, ctxs: EvalContextSet, ref, eta) -> float:
    """Average game value of (pi1, pi2) under an arbitrary preference model.

    ``pref_matrix_fn(x)`` returns the pairwise probability matrix at a
    context; policies are context-indexed functions.
    """
    Qs = np.stack([pref_matrix_fn(x) for x in ctxs.contexts])
    Pi1 = _policy_matrix(pi1_fn, ctxs.contexts)
    Pi2 = _policy_matrix(pi2_fn, ctxs.contexts)
    return float(_game_values(Qs, Pi1, Pi2, ref, eta).mean())


def value_bt(reward_fn, pi_fn, ctxs: EvalContextSet, ref, eta) -> float:
    """Average regularized reward value of a policy.

    ``reward_fn(x)`` returns the per-action reward vector at a context.
    """
    Rs = np.stack([np.asarray(reward_fn(x), dtype=np.float64) for x in ctxs.contexts])
    Pi = _policy_matrix(pi_fn, ctxs.contexts)
    return float(_reward_values(Rs, Pi, ref, eta).mean())


def delta_gp_matrix(Pi1: np.ndarray, ctxs: EvalContextSet) -> float:
    """Suboptimality gap of a proposer policy given as a matrix over ctxs.

    The adversary's inner minimum is exact per context: the best response
    tilts the reference by the negated expected win rate.
    """
    if ctxs.variant != "gp":
        raise ValueError("delta_gp needs a preference-variant context set")
    G = np.einsum("ea,eab->eb", Pi1, ctxs.q_true)
    Br = gibbs_policy_rows(-G, ctxs.ref, ctxs.eta)
    win = np.einsum("eb,eb->e", G, Br)
    vals = win - kl_divergence_rows(Pi1, ctxs.ref) / ctxs.eta
    vals = vals + kl_divergence_rows(Br, ctxs.ref) / ctxs.eta
    return float((ctxs.j_star - vals).mean())


def delta_gp(pi1_fn, instance: Instance, ctxs: EvalContextSet) -> float:
    _check_fingerprint(instance, ctxs)
    return delta_gp_matrix(_policy_matrix(pi1_fn, ctxs.contexts), ctxs)


def delta_bt_matrix(Pi: np.ndarray, ctxs: EvalContextSet) -> float:
    if ctxs.variant != "bt":
        raise ValueError("delta_bt needs a reward-variant context set")
    vals = _reward_values(ctxs.r_true, Pi, ctxs.ref, ctxs.eta)
    return float((ctxs.j_star - vals).mean())


def delta_bt(pi_fn, instance: Instance, ctxs: EvalContextSet) -> float:
    _check_fingerprint(instance, ctxs)
    return delta_bt_matrix(_policy_matrix(pi_fn, ctxs.contexts), ctxs)


def _check_fingerprint(instance: Instance, ctxs: EvalContextSet) -> None:
    if instance.fingerprint() != ctxs.instance_fingerprint:
        raise ValueError("evaluation context set was built for a different instance")


def step_evaluator(ctxs: EvalContextSet):
    """Bind the context set into a step-regret callback for online runs.

    The callback receives a function mapping a batch of contexts to a
    policy matrix and returns the gap of that policy.
    """
    delta = delta_gp_matrix if ctxs.variant == "gp" else delta_bt_matrix
    neg_tol = NEGATIVE_REGRET_TOL[ctxs.variant]

    def evaluate(policy_batch_fn: PolicyMatrixFn) -> float:
        value = delta(policy_batch_fn(ctxs.contexts), ctxs)
        if value < -neg_tol:
            raise RegretAnomalyError(
                f"step regret {value:.3e} below -{neg_tol:g}; evaluation oracle broken"
            )
        return value

    return evaluate


def coverage_coefficient(
    dataset: PreferenceDataset,
    pi1_fn,
    pi2_fn,
    instance: Instance,
) -> float:
    """Worst-case ratio of target to empirical action probabilities.

    Defined for finite context lists only: the empirical conditionals are
    per-context action frequencies. Returns inf when some cell with
    positive target mass has no data.
    """
    if not isinstance(instance.context_dist, FiniteContexts):
        raise ContinuousContextError(
            "coverage coefficients need an instance with a finite context list"
        )
    ctx_list = instance.context_dist.contexts
    n_actions = instance.n_actions
    X, a1, a2, _ = dataset.views()
    worst = 0.0
    for c in range(ctx_list.shape[0]):
        x = ctx_list[c]
        mask = np.all(X == x[None, :], axis=1)
        count = int(mask.sum())
        p1 = np.asarray(pi1_fn(x), dtype=np.float64)
        p2 = np.asarray(pi2_fn(x), dtype=np.float64)
        if count == 0:
            if np.any(p1 > 0.0) and np.any(p2 > 0.0):
                return np.inf
            continue
        mu1 = np.bincount(a1[mask], minlength=n_actions) / count
        mu2 = np.bincount(a2[mask], minlength=n_actions) / count
        target = p1[:, None] * p2[None, :]
        empirical = mu1[:, None] * mu2[None, :]
        live = target > 0.0
        if np.any(empirical[live] == 0.0):
            return np.inf
        worst = max(worst, float((target[live] / empirical[live]).max()))
    return worst


@dataclass
class RegretTrace:
    """Per-round step regrets and their running sum for one seeded run."""

    seed: int
    config_hash: str
    step: np.ndarray
    cumulative: np.ndarray

    @classmethod
    def from_steps(cls, steps, seed: int, config_hash: str, variant: str) -> "RegretTrace":
        steps = np.asarray(steps, dtype=np.float64)
        tol = NEGATIVE_REGRET_TOL[variant]
        finite = steps[~np.isnan(steps)]
        if finite.size and float(finite.min()) < -tol:
            raise RegretAnomalyError(
                f"step regret {finite.min():.3e} below -{tol:g}"
            )
        cum = np.nancumsum(steps)
        return cls(seed=seed, config_hash=config_hash, step=steps, cumulative=cum)
