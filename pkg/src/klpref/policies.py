"""Gibbs policies, best responses, and the Nash-equilibrium oracle.

All functions operate on a single context through its pairwise
preference matrix ``Q`` (``Q[a, b]`` = probability that action ``a``
beats ``b``). The KL-regularized best response to a fixed payoff vector
is the Gibbs tilt of the reference policy; the equilibrium of the
symmetric preference game is the fixed point of tilting against the
expected payoff induced by the policy itself.
"""

import numpy as np

from klpref import _kernels
from klpref.errors import NonConvergenceError, SupportError

NASH_TOL = 1e-10
NASH_MAX_ITER = 10_000


def gibbs_policy(f_values: np.ndarray, ref: np.ndarray, eta: float) -> np.ndarray:
    """Reference policy tilted by exp(eta * f), normalized.

    The max exponent is subtracted before exponentiation, so constant
    payoffs and eta = 0 reproduce the reference exactly up to the
    normalization of ``ref`` itself.
    """
    f_values = np.asarray(f_values, dtype=np.float64)
    z = eta * f_values
    w = ref * np.exp(z - z.max())
    return w / w.sum()


def best_response_max(Q: np.ndarray, opponent: np.ndarray, ref: np.ndarray, eta: float) -> np.ndarray:
    """Maximizing player's KL-regularized best response to a fixed opponent.

    The payoff of action a is its expected win probability against the
    opponent distribution, Q @ opponent.
    """
    return gibbs_policy(Q @ opponent, ref, eta)


def best_response_min(Q: np.ndarray, proposer: np.ndarray, ref: np.ndarray, eta: float) -> np.ndarray:
    """Minimizing player's best response: tilt by the negated expected loss."""
    return gibbs_policy(-(proposer @ Q), ref, eta)


def nash_fixed_point(
    Q: np.ndarray,
    ref: np.ndarray,
    eta: float,
    tol: float = NASH_TOL,
    max_iter: int = NASH_MAX_ITER,
) -> np.ndarray:
    """Symmetric equilibrium policy of the preference game at one context.

    Iterates pi <- Gibbs(eta * Q @ pi) and returns the first iterate
    whose distance to its own image is at most ``tol`` in max norm.
    Raises NonConvergenceError (carrying the last residual) if the budget
    is exhausted.
    """
    pi, residual, _, ok = nash_fixed_point_batch(
        Q[None, :, :], ref, eta, tol=tol, max_iter=max_iter
    )
    if not ok[0]:
        raise NonConvergenceError(residual[0], max_iter)
    return pi[0]


def nash_fixed_point_batch(
    Qs: np.ndarray,
    ref: np.ndarray,
    eta: float,
    tol: float = NASH_TOL,
    max_iter: int = NASH_MAX_ITER,
):
    """Equilibria for a batch of preference matrices.

    Returns (policies, residuals, iterations, converged); callers decide
    whether non-convergence is fatal.
    """
    Qs = np.ascontiguousarray(Qs, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    return _kernels.nash_solve_batch(Qs, ref, float(eta), float(tol), int(max_iter))


def nash_residual(Q: np.ndarray, pi: np.ndarray, ref: np.ndarray, eta: float) -> float:
    """Max-norm distance between a policy and its fixed-point image."""
    return float(np.abs(gibbs_policy(Q @ pi, ref, eta) - pi).max())


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) over the finite action set, with 0 log 0 = 0.

    Raises SupportError when p puts mass where q has none.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    pos = p > 0.0
    if np.any(q[pos] <= 0.0):
        raise SupportError("policy places mass outside the reference support")
    return float(np.sum(p[pos] * (np.log(p[pos]) - np.log(q[pos]))))


def kl_divergence_rows(P: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise KL(P[e] || q) for a batch of policies."""
    P = np.asarray(P, dtype=np.float64)
    if np.any((P > 0.0) & (q[None, :] <= 0.0)):
        raise SupportError("policy places mass outside the reference support")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0.0, P * (np.log(P) - np.log(q[None, :])), 0.0)
    return terms.sum(axis=1)


def gibbs_policy_rows(F: np.ndarray, ref: np.ndarray, eta: float) -> np.ndarray:
    """Row-wise Gibbs tilt for a batch of payoff vectors."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    return _kernels.gibbs_rows(F, ref, float(eta))


def log_partition(f_values: np.ndarray, ref: np.ndarray, eta: float) -> float:
    """log sum_a ref(a) exp(eta f(a)), the normalizer of the Gibbs tilt.

    eta^-1 times this value is the optimum of the KL-regularized
    objective with payoff f.
    """
    z = eta * np.asarray(f_values, dtype=np.float64)
    m = z.max()
    return float(m + np.log(np.sum(ref * np.exp(z - m))))
