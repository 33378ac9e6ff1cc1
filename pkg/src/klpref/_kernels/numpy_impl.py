"""Pure-numpy kernel implementations.

These are the reference semantics for the numba kernels in
``numba_impl``; both backends must agree to floating-point noise. Arrays
are float64 throughout, action identities are int64 index arrays into an
(n_actions, k) action matrix.

The likelihood kernels exploit the finite action set: bilinear scores
factor through the 36-odd ordered action pairs, so each objective call
contracts the parameter tensor with per-pair outer products once and
then touches every record with O(k) work.
"""

import numpy as np

NAME = "numpy"


def gibbs_rows(f, pi0, eta):
    """Row-wise Gibbs tilt: out[e] proportional to pi0 * exp(eta * f[e]).

    The max exponent is subtracted per row before exponentiation.
    """
    z = eta * f
    z = z - z.max(axis=-1, keepdims=True)
    w = pi0 * np.exp(z)
    return w / w.sum(axis=-1, keepdims=True)


def nash_solve_batch(Q, pi0, eta, tol, max_iter):
    """Fixed-point iteration for the symmetric Gibbs equilibrium, batched.

    For each payoff matrix ``Q[e]`` iterates ``pi <- Gibbs(eta * Q @ pi)``
    until the max-norm residual between iterate and image drops to
    ``tol``. The returned policy is the iterate itself, so recomputing the
    residual at the output reproduces the converged value. Plain
    iteration switches to half-step averaging for a row after its
    residual grows 10 times in a row.

    Returns (policies, residuals, iterations, converged) with one entry
    per leading index of Q.
    """
    Q = np.asarray(Q, dtype=np.float64)
    E = Q.shape[0]
    out = np.tile(np.asarray(pi0, dtype=np.float64), (E, 1))
    res_out = np.full(E, np.inf)
    it_out = np.zeros(E, dtype=np.int64)
    ok = np.zeros(E, dtype=bool)

    active = np.arange(E)
    cur = out.copy()
    prev_res = np.full(E, np.inf)
    inc_count = np.zeros(E, dtype=np.int64)
    averaging = np.zeros(E, dtype=bool)

    for it in range(max_iter):
        f = np.einsum("eab,eb->ea", Q[active], cur[active])
        nxt = gibbs_rows(f, pi0, eta)
        res = np.abs(nxt - cur[active]).max(axis=1)

        done = res <= tol
        done_idx = active[done]
        out[done_idx] = cur[done_idx]
        res_out[done_idx] = res[done]
        it_out[done_idx] = it + 1
        ok[done_idx] = True

        live = ~done
        live_idx = active[live]
        if live_idx.size == 0:
            return out, res_out, it_out, ok

        grew = res[live] > prev_res[live_idx]
        inc_count[live_idx] = np.where(grew, inc_count[live_idx] + 1, 0)
        averaging[live_idx] |= inc_count[live_idx] >= 10
        prev_res[live_idx] = res[live]

        avg = averaging[live_idx][:, None]
        cur[live_idx] = np.where(
            avg, 0.5 * (cur[live_idx] + nxt[live]), nxt[live]
        )
        active = live_idx

    out[active] = cur[active]
    res_out[active] = prev_res[active]
    it_out[active] = max_iter
    return out, res_out, it_out, ok


def _pair_tables(A, a1_idx, a2_idx):
    """Ordered-pair index per record plus the pair outer-product basis."""
    n_actions = A.shape[0]
    O = (A[:, None, :, None] * A[None, :, None, :]).reshape(
        n_actions * n_actions, A.shape[1], A.shape[1]
    )
    p1 = a1_idx * n_actions + a2_idx
    p2 = a2_idx * n_actions + a1_idx
    return O, p1, p2


def gp_scores(M, X, A, a1_idx, a2_idx):
    """Bilinear preference scores per record.

    s1[i] = a1_i^T (x_i M) a2_i and s2[i] with the action roles swapped,
    where (x M) contracts the context with the first tensor index.
    """
    O, p1, p2 = _pair_tables(A, a1_idx, a2_idx)
    C = np.einsum("ijl,pjl->pi", M, O)
    s1 = np.einsum("ni,ni->n", X, C[p1])
    s2 = np.einsum("ni,ni->n", X, C[p2])
    return s1, s2


def gp_loglik(M, X, A, a1_idx, a2_idx, y):
    """Mean preference log-likelihood of tensor M. -inf when any score
    required by a label is non-positive."""
    s1, s2 = gp_scores(M, X, A, a1_idx, a2_idx)
    denom = s1 + s2
    chosen = np.where(y == 1, s1, s2)
    if np.any(denom <= 0.0) or np.any(chosen <= 0.0):
        return -np.inf
    return float(np.mean(np.log(chosen) - np.log(denom)))


def gp_loglik_grad(M, X, A, a1_idx, a2_idx, y):
    """Mean log-likelihood and its analytic gradient with respect to M."""
    O, p1, p2 = _pair_tables(A, a1_idx, a2_idx)
    C = np.einsum("ijl,pjl->pi", M, O)
    s1 = np.einsum("ni,ni->n", X, C[p1])
    s2 = np.einsum("ni,ni->n", X, C[p2])
    denom = s1 + s2
    yf = y.astype(np.float64)
    chosen = np.where(y == 1, s1, s2)
    if np.any(denom <= 0.0) or np.any(chosen <= 0.0):
        return -np.inf, np.zeros_like(M)
    n, k = X.shape
    # d loglik / d s1 = y/s1 - 1/(s1+s2), and symmetrically for s2; the
    # score gradient is x (x) a1 (x) a2, which groups by ordered pair.
    with np.errstate(divide="ignore"):
        c1 = np.where(yf == 1.0, 1.0 / s1, 0.0) - 1.0 / denom
        c2 = np.where(yf == 0.0, 1.0 / s2, 0.0) - 1.0 / denom
    n_pairs = O.shape[0]
    H = np.zeros((n_pairs, k))
    for i in range(k):
        H[:, i] = np.bincount(p1, weights=c1 * X[:, i], minlength=n_pairs)
        H[:, i] += np.bincount(p2, weights=c2 * X[:, i], minlength=n_pairs)
    grad = np.einsum("pi,pjl->ijl", H, O) / n
    ll = float(np.mean(np.log(chosen) - np.log(denom)))
    return ll, grad


def _projected_gnorm(theta, grad, lo, hi):
    pg = grad.copy()
    pg[(theta <= lo) & (grad < 0.0)] = 0.0
    pg[(theta >= hi) & (grad > 0.0)] = 0.0
    return float(np.abs(pg).max()) if pg.size else 0.0


def _ascend(value, value_grad, theta0, lo, hi,
            max_iter, tol, armijo, step_init, step_min, step_grow):
    """Projected gradient ascent with Armijo backtracking; spectral
    (Barzilai-Borwein) trial steps when the curvature estimate is usable.
    Decision-for-decision the same driver as the numba backend."""
    theta = np.clip(theta0, lo, hi)
    ll, grad = value_grad(theta)
    if not np.isfinite(ll):
        return theta, ll, np.inf, -1, step_init
    step = step_init
    bb_step = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = _projected_gnorm(theta, grad, lo, hi)
        if gnorm <= tol:
            it -= 1
            break
        trial = bb_step if bb_step > 0.0 else step * step_grow
        accepted = False
        while trial >= step_min:
            cand = np.clip(theta + trial * grad, lo, hi)
            gain = float(np.sum(grad * (cand - theta)))
            ll_cand = value(cand)
            if np.isfinite(ll_cand) and ll_cand >= ll + armijo * gain and gain > 0.0:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        step = trial
        ll, new_grad = value_grad(cand)
        s = cand - theta
        sy = float(np.sum(s * (grad - new_grad)))
        bb_step = float(np.sum(s * s)) / sy if sy > 1e-300 else 0.0
        theta = cand
        grad = new_grad
    gnorm = _projected_gnorm(theta, grad, lo, hi)
    return theta, ll, gnorm, it, step


def gp_fit(theta0, X, A, a1_idx, a2_idx, y, lo, hi,
           max_iter, tol, armijo, step_init, step_min, step_grow):
    k = A.shape[1]

    def value(th):
        return gp_loglik(th.reshape(k, k, k), X, A, a1_idx, a2_idx, y)

    def value_grad(th):
        ll, g = gp_loglik_grad(th.reshape(k, k, k), X, A, a1_idx, a2_idx, y)
        return ll, g.ravel()

    return _ascend(value, value_grad, theta0, lo, hi,
                   max_iter, tol, armijo, step_init, step_min, step_grow)


def bt_fit(theta0, X, A, a1_idx, a2_idx, y, lo, hi,
           max_iter, tol, armijo, step_init, step_min, step_grow):
    k = A.shape[1]

    def value(th):
        return bt_loglik(th.reshape(k, k), X, A, a1_idx, a2_idx, y)

    def value_grad(th):
        ll, g = bt_loglik_grad(th.reshape(k, k), X, A, a1_idx, a2_idx, y)
        return ll, g.ravel()

    return _ascend(value, value_grad, theta0, lo, hi,
                   max_iter, tol, armijo, step_init, step_min, step_grow)


def _log_sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = -np.log1p(np.exp(-z[pos]))
    out[~pos] = z[~pos] - np.log1p(np.exp(z[~pos]))
    return out


def _bt_margins(W, X, A, a1_idx, a2_idx):
    diffs = A[:, None, :] - A[None, :, :]
    n_actions = A.shape[0]
    V = diffs.reshape(n_actions * n_actions, -1) @ W.T  # (pairs, k)
    p = a1_idx * n_actions + a2_idx
    return np.einsum("ni,ni->n", X, V[p]), p


def bt_loglik(W, X, A, a1_idx, a2_idx, y):
    """Mean logistic log-likelihood of the reward matrix."""
    z, _ = _bt_margins(W, X, A, a1_idx, a2_idx)
    yf = y.astype(np.float64)
    ll = yf * _log_sigmoid(z) + (1.0 - yf) * _log_sigmoid(-z)
    return float(ll.mean())


def bt_loglik_grad(W, X, A, a1_idx, a2_idx, y):
    """Mean logistic log-likelihood and its gradient with respect to W."""
    z, p = _bt_margins(W, X, A, a1_idx, a2_idx)
    yf = y.astype(np.float64)
    ll = yf * _log_sigmoid(z) + (1.0 - yf) * _log_sigmoid(-z)
    prob = np.empty_like(z)
    pos = z >= 0
    u = np.exp(-z[pos])
    prob[pos] = 1.0 / (1.0 + u)
    u = np.exp(z[~pos])
    prob[~pos] = u / (1.0 + u)
    c = yf - prob
    n, k = X.shape
    n_actions = A.shape[0]
    n_pairs = n_actions * n_actions
    H = np.zeros((n_pairs, k))
    for i in range(k):
        H[:, i] = np.bincount(p, weights=c * X[:, i], minlength=n_pairs)
    diffs = (A[:, None, :] - A[None, :, :]).reshape(n_pairs, k)
    grad = (H.T @ diffs) / n
    return float(ll.mean()), grad
