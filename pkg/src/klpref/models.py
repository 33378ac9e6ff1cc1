"""Preference probabilities and rewards for both model families.

The general preference probability is the bilinear ratio

    P(x, a1, a2) = s1 / (s1 + s2),   s1 = a1^T (x M) a2,  s2 = a2^T (x M) a1,

where ``x M`` contracts the context with the *first* tensor index (the
normative convention here). The Bradley-Terry probability is the
logistic of the reward difference with reward x^T W a.

Both families are evaluated so that P(x, a1, a2) + P(x, a2, a1) == 1.0
holds exactly in floating point: the smaller of the two complementary
quotients is always the one computed directly, the larger is derived as
its one-complement.
"""

import numpy as np

from klpref.core import BTParams, GPParams, ModelParams
from klpref.errors import DegeneratePairError


def sigmoid(z):
    """Logistic function with exact complement symmetry.

    Computes the <= 1/2 branch directly from exp(-|z|) and mirrors it, so
    sigmoid(z) + sigmoid(-z) == 1.0 bitwise for every float z.
    """
    z = np.asarray(z, dtype=np.float64)
    u = np.exp(-np.abs(z))
    small = u / (1.0 + u)
    out = np.where(z >= 0.0, 1.0 - small, small)
    if out.ndim == 0:
        return float(out)
    return out


def _ratio(s1, s2):
    """s1 / (s1 + s2) with exact complement: _ratio(a,b) + _ratio(b,a) == 1."""
    if s1 <= s2:
        return s1 / (s1 + s2)
    return 1.0 - s2 / (s1 + s2)


def contract_context(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Contract the context with the first tensor index, giving a k x k matrix."""
    return np.einsum("i,ijl->jl", x, M)


def gp_preference_prob(M: np.ndarray, x, a1, a2) -> float:
    """Probability that action a1 beats a2 under the tensor model at context x.

    Raises DegeneratePairError when both bilinear forms vanish (the ratio
    is undefined; with sampled uniform tensors this is a measure-zero
    event, so it is surfaced rather than defaulted).
    """
    xm = contract_context(M, np.asarray(x, dtype=np.float64))
    a1 = np.asarray(a1, dtype=np.float64)
    a2 = np.asarray(a2, dtype=np.float64)
    s1 = float(a1 @ xm @ a2)
    s2 = float(a2 @ xm @ a1)
    if s1 + s2 <= 0.0:
        raise DegeneratePairError(
            "both bilinear preference scores are zero for this (x, a1, a2)"
        )
    return _ratio(s1, s2)


def bt_reward(W: np.ndarray, x, a) -> float:
    return float(np.asarray(x, dtype=np.float64) @ W @ np.asarray(a, dtype=np.float64))


def bt_preference_prob(W: np.ndarray, x, a1, a2) -> float:
    return sigmoid(bt_reward(W, x, a1) - bt_reward(W, x, a2))


def preference_prob(params: ModelParams, x, a1, a2) -> float:
    """Dispatch on the model family."""
    if isinstance(params, GPParams):
        return gp_preference_prob(params.tensor, x, a1, a2)
    return bt_preference_prob(params.matrix, x, a1, a2)


def _ratio_matrix(S: np.ndarray) -> np.ndarray:
    """Elementwise canonical ratio of S against its transpose."""
    D = S + S.T
    if np.any(D <= 0.0):
        raise DegeneratePairError(
            "a preference pair has both bilinear scores zero at this context"
        )
    St = S.T
    with np.errstate(invalid="ignore"):
        return np.where(S <= St, S / D, 1.0 - St / D)


def gp_preference_matrix(M: np.ndarray, x, actions: np.ndarray) -> np.ndarray:
    """Pairwise preference matrix Q[a, b] = P(x, action_a, action_b)."""
    xm = contract_context(M, np.asarray(x, dtype=np.float64))
    S = actions @ xm @ actions.T
    return _ratio_matrix(S)


def gp_preference_matrices(M: np.ndarray, X: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Preference matrices for a batch of contexts, shape (len(X), n, n)."""
    XM = np.einsum("ei,ijl->ejl", X, M)
    S = np.einsum("aj,ejl,bl->eab", actions, XM, actions)
    D = S + S.transpose(0, 2, 1)
    if np.any(D <= 0.0):
        raise DegeneratePairError(
            "a preference pair has both bilinear scores zero at some context"
        )
    St = S.transpose(0, 2, 1)
    return np.where(S <= St, S / D, 1.0 - St / D)


def bt_reward_vector(W: np.ndarray, x, actions: np.ndarray) -> np.ndarray:
    """Rewards of every action at one context."""
    return actions @ (np.asarray(x, dtype=np.float64) @ W)


def bt_reward_matrix(W: np.ndarray, X: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Rewards for a batch of contexts, shape (len(X), n_actions)."""
    return X @ W @ actions.T


def bt_preference_matrix(W: np.ndarray, x, actions: np.ndarray) -> np.ndarray:
    r = bt_reward_vector(W, x, actions)
    return sigmoid(r[:, None] - r[None, :])


def preference_matrix(params: ModelParams, x, actions: np.ndarray) -> np.ndarray:
    if isinstance(params, GPParams):
        return gp_preference_matrix(params.tensor, x, actions)
    return bt_preference_matrix(params.matrix, x, actions)


def preference_prob_pairs(
    params: ModelParams, X: np.ndarray, actions: np.ndarray, a1_idx, a2_idx
) -> np.ndarray:
    """Vectorized P(x_i, a1_i, a2_i) over records (one context per record)."""
    if isinstance(params, GPParams):
        Q = gp_preference_matrices(params.tensor, X, actions)
        idx = np.arange(X.shape[0])
        return Q[idx, a1_idx, a2_idx]
    R = bt_reward_matrix(params.matrix, X, actions)
    idx = np.arange(X.shape[0])
    return sigmoid(R[idx, a1_idx] - R[idx, a2_idx])


def bt_entry_bound(k: int) -> float:
    """Upper bound for reward-matrix entries (the sampled truth space)."""
    return 1.0
