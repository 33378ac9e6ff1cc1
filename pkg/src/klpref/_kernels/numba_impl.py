"""Numba-JIT kernel implementations.

Semantics mirror ``numpy_impl`` exactly; see that module for contracts.
Compiled objects are cached on disk, so the first import in a fresh
environment pays the compile cost once.
"""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def _gibbs_row(f, pi0, eta, out):
    n = f.shape[0]
    m = eta * f[0]
    for a in range(1, n):
        z = eta * f[a]
        if z > m:
            m = z
    s = 0.0
    for a in range(n):
        out[a] = pi0[a] * np.exp(eta * f[a] - m)
        s += out[a]
    for a in range(n):
        out[a] /= s


@njit(cache=True, nogil=True)
def gibbs_rows(F, pi0, eta):
    E, n = F.shape
    out = np.empty((E, n))
    for e in range(E):
        _gibbs_row(F[e], pi0, eta, out[e])
    return out


@njit(cache=True, nogil=True)
def _nash_solve_one(Q, pi0, eta, tol, max_iter, out):
    n = Q.shape[0]
    cur = pi0.copy()
    nxt = np.empty(n)
    f = np.empty(n)
    prev_res = np.inf
    inc_count = 0
    averaging = False
    res = np.inf
    for it in range(max_iter):
        for a in range(n):
            s = 0.0
            for b in range(n):
                s += Q[a, b] * cur[b]
            f[a] = s
        _gibbs_row(f, pi0, eta, nxt)
        res = 0.0
        for a in range(n):
            d = abs(nxt[a] - cur[a])
            if d > res:
                res = d
        if res <= tol:
            for a in range(n):
                out[a] = cur[a]
            return res, it + 1, True
        if res > prev_res:
            inc_count += 1
            if inc_count >= 10:
                averaging = True
        else:
            inc_count = 0
        prev_res = res
        if averaging:
            for a in range(n):
                cur[a] = 0.5 * (cur[a] + nxt[a])
        else:
            for a in range(n):
                cur[a] = nxt[a]
    for a in range(n):
        out[a] = cur[a]
    return res, max_iter, False


@njit(cache=True, nogil=True)
def nash_solve_batch(Q, pi0, eta, tol, max_iter):
    E, n = Q.shape[0], Q.shape[1]
    out = np.empty((E, n))
    res = np.empty(E)
    its = np.empty(E, dtype=np.int64)
    ok = np.empty(E, dtype=np.bool_)
    for e in range(E):
        r, i, c = _nash_solve_one(Q[e], pi0, eta, tol, max_iter, out[e])
        res[e] = r
        its[e] = i
        ok[e] = c
    return out, res, its, ok


@njit(cache=True, nogil=True)
def _pair_contractions(M, A):
    """C[p] = sum_jl M[:, j, l] * a1_j * a2_l per ordered action pair."""
    n_actions, k = A.shape
    C = np.zeros((n_actions * n_actions, k))
    for a in range(n_actions):
        for b in range(n_actions):
            p = a * n_actions + b
            for i in range(k):
                acc = 0.0
                for j in range(k):
                    for l in range(k):
                        acc += M[i, j, l] * A[a, j] * A[b, l]
                C[p, i] = acc
    return C


@njit(cache=True, nogil=True)
def gp_scores(M, X, A, a1_idx, a2_idx):
    n = X.shape[0]
    n_actions, k = A.shape
    C = _pair_contractions(M, A)
    s1 = np.empty(n)
    s2 = np.empty(n)
    for r in range(n):
        p1 = a1_idx[r] * n_actions + a2_idx[r]
        p2 = a2_idx[r] * n_actions + a1_idx[r]
        acc1 = 0.0
        acc2 = 0.0
        for i in range(k):
            acc1 += X[r, i] * C[p1, i]
            acc2 += X[r, i] * C[p2, i]
        s1[r] = acc1
        s2[r] = acc2
    return s1, s2


@njit(cache=True, nogil=True)
def gp_loglik(M, X, A, a1_idx, a2_idx, y):
    n = X.shape[0]
    n_actions, k = A.shape
    C = _pair_contractions(M, A)
    total = 0.0
    for r in range(n):
        p1 = a1_idx[r] * n_actions + a2_idx[r]
        p2 = a2_idx[r] * n_actions + a1_idx[r]
        s1 = 0.0
        s2 = 0.0
        for i in range(k):
            s1 += X[r, i] * C[p1, i]
            s2 += X[r, i] * C[p2, i]
        denom = s1 + s2
        chosen = s1 if y[r] == 1 else s2
        if denom <= 0.0 or chosen <= 0.0:
            return -np.inf
        total += np.log(chosen) - np.log(denom)
    return total / n


@njit(cache=True, nogil=True)
def gp_loglik_grad(M, X, A, a1_idx, a2_idx, y):
    n = X.shape[0]
    n_actions, k = A.shape
    n_pairs = n_actions * n_actions
    C = _pair_contractions(M, A)
    H = np.zeros((n_pairs, k))
    total = 0.0
    for r in range(n):
        p1 = a1_idx[r] * n_actions + a2_idx[r]
        p2 = a2_idx[r] * n_actions + a1_idx[r]
        s1 = 0.0
        s2 = 0.0
        for i in range(k):
            s1 += X[r, i] * C[p1, i]
            s2 += X[r, i] * C[p2, i]
        denom = s1 + s2
        chosen = s1 if y[r] == 1 else s2
        if denom <= 0.0 or chosen <= 0.0:
            return -np.inf, np.zeros((k, k, k))
        total += np.log(chosen) - np.log(denom)
        inv_d = 1.0 / denom
        c1 = (1.0 / s1 if y[r] == 1 else 0.0) - inv_d
        c2 = (1.0 / s2 if y[r] == 0 else 0.0) - inv_d
        for i in range(k):
            H[p1, i] += c1 * X[r, i]
            H[p2, i] += c2 * X[r, i]
    grad = np.zeros((k, k, k))
    for a in range(n_actions):
        for b in range(n_actions):
            p = a * n_actions + b
            for i in range(k):
                h = H[p, i]
                if h == 0.0:
                    continue
                for j in range(k):
                    hj = h * A[a, j]
                    for l in range(k):
                        grad[i, j, l] += hj * A[b, l]
    return total / n, grad / n


@njit(cache=True, nogil=True)
def _projected_gnorm(theta, grad, lo, hi):
    worst = 0.0
    for i in range(theta.shape[0]):
        g = grad[i]
        if theta[i] <= lo and g < 0.0:
            continue
        if theta[i] >= hi and g > 0.0:
            continue
        a = abs(g)
        if a > worst:
            worst = a
    return worst


@njit(cache=True, nogil=True)
def _clip_step(theta, grad, trial, lo, hi, out):
    for i in range(theta.shape[0]):
        v = theta[i] + trial * grad[i]
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        out[i] = v


@njit(cache=True, nogil=True)
def gp_fit(theta0, X, A, a1_idx, a2_idx, y, lo, hi,
           max_iter, tol, armijo, step_init, step_min, step_grow):
    """Projected gradient ascent with Armijo backtracking on the tensor
    log-likelihood. Trial steps use the spectral (Barzilai-Borwein)
    estimate when usable, else the grown last accepted step. Matches the
    numpy backend's driver decision for decision."""
    k = A.shape[1]
    d = theta0.shape[0]
    theta = np.empty(d)
    _clip_step(theta0, theta0, 0.0, lo, hi, theta)
    ll, grad3 = gp_loglik_grad(theta.reshape(k, k, k), X, A, a1_idx, a2_idx, y)
    grad = grad3.ravel()
    if not np.isfinite(ll):
        return theta, ll, np.inf, -1, step_init
    step = step_init
    bb_step = 0.0
    cand = np.empty(d)
    it = 0
    gnorm = _projected_gnorm(theta, grad, lo, hi)
    for it in range(1, max_iter + 1):
        gnorm = _projected_gnorm(theta, grad, lo, hi)
        if gnorm <= tol:
            it -= 1
            break
        trial = bb_step if bb_step > 0.0 else step * step_grow
        accepted = False
        while trial >= step_min:
            _clip_step(theta, grad, trial, lo, hi, cand)
            gain = 0.0
            for i in range(d):
                gain += grad[i] * (cand[i] - theta[i])
            ll_cand = gp_loglik(cand.reshape(k, k, k), X, A, a1_idx, a2_idx, y)
            if np.isfinite(ll_cand) and ll_cand >= ll + armijo * gain and gain > 0.0:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        step = trial
        ll, new_grad3 = gp_loglik_grad(
            cand.reshape(k, k, k), X, A, a1_idx, a2_idx, y
        )
        new_grad = new_grad3.ravel()
        ss = 0.0
        sy = 0.0
        for i in range(d):
            s_i = cand[i] - theta[i]
            ss += s_i * s_i
            sy += s_i * (grad[i] - new_grad[i])
        bb_step = ss / sy if sy > 1e-300 else 0.0
        for i in range(d):
            theta[i] = cand[i]
            grad[i] = new_grad[i]
    gnorm = _projected_gnorm(theta, grad, lo, hi)
    return theta, ll, gnorm, it, step


@njit(cache=True, nogil=True)
def bt_fit(theta0, X, A, a1_idx, a2_idx, y, lo, hi,
           max_iter, tol, armijo, step_init, step_min, step_grow):
    """Same driver as gp_fit for the logistic reward objective."""
    k = A.shape[1]
    d = theta0.shape[0]
    theta = np.empty(d)
    _clip_step(theta0, theta0, 0.0, lo, hi, theta)
    ll, grad2 = bt_loglik_grad(theta.reshape(k, k), X, A, a1_idx, a2_idx, y)
    grad = grad2.ravel()
    if not np.isfinite(ll):
        return theta, ll, np.inf, -1, step_init
    step = step_init
    bb_step = 0.0
    cand = np.empty(d)
    it = 0
    gnorm = _projected_gnorm(theta, grad, lo, hi)
    for it in range(1, max_iter + 1):
        gnorm = _projected_gnorm(theta, grad, lo, hi)
        if gnorm <= tol:
            it -= 1
            break
        trial = bb_step if bb_step > 0.0 else step * step_grow
        accepted = False
        while trial >= step_min:
            _clip_step(theta, grad, trial, lo, hi, cand)
            gain = 0.0
            for i in range(d):
                gain += grad[i] * (cand[i] - theta[i])
            ll_cand = bt_loglik(cand.reshape(k, k), X, A, a1_idx, a2_idx, y)
            if np.isfinite(ll_cand) and ll_cand >= ll + armijo * gain and gain > 0.0:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        step = trial
        ll, new_grad2 = bt_loglik_grad(cand.reshape(k, k), X, A, a1_idx, a2_idx, y)
        new_grad = new_grad2.ravel()
        ss = 0.0
        sy = 0.0
        for i in range(d):
            s_i = cand[i] - theta[i]
            ss += s_i * s_i
            sy += s_i * (grad[i] - new_grad[i])
        bb_step = ss / sy if sy > 1e-300 else 0.0
        for i in range(d):
            theta[i] = cand[i]
            grad[i] = new_grad[i]
    gnorm = _projected_gnorm(theta, grad, lo, hi)
    return theta, ll, gnorm, it, step


@njit(cache=True, nogil=True)
def _log_sigmoid_scalar(z):
    if z >= 0.0:
        return -np.log1p(np.exp(-z))
    return z - np.log1p(np.exp(z))


@njit(cache=True, nogil=True)
def _bt_pair_margins(W, A):
    """V[p] = W (a1 - a2) per ordered action pair."""
    n_actions, k = A.shape
    V = np.zeros((n_actions * n_actions, k))
    for a in range(n_actions):
        for b in range(n_actions):
            p = a * n_actions + b
            for i in range(k):
                acc = 0.0
                for j in range(k):
                    acc += W[i, j] * (A[a, j] - A[b, j])
                V[p, i] = acc
    return V


@njit(cache=True, nogil=True)
def bt_loglik(W, X, A, a1_idx, a2_idx, y):
    n = X.shape[0]
    n_actions, k = A.shape
    V = _bt_pair_margins(W, A)
    total = 0.0
    for r in range(n):
        p = a1_idx[r] * n_actions + a2_idx[r]
        z = 0.0
        for i in range(k):
            z += X[r, i] * V[p, i]
        if y[r] == 1:
            total += _log_sigmoid_scalar(z)
        else:
            total += _log_sigmoid_scalar(-z)
    return total / n


@njit(cache=True, nogil=True)
def bt_loglik_grad(W, X, A, a1_idx, a2_idx, y):
    n = X.shape[0]
    n_actions, k = A.shape
    n_pairs = n_actions * n_actions
    V = _bt_pair_margins(W, A)
    H = np.zeros((n_pairs, k))
    total = 0.0
    for r in range(n):
        p = a1_idx[r] * n_actions + a2_idx[r]
        z = 0.0
        for i in range(k):
            z += X[r, i] * V[p, i]
        if y[r] == 1:
            total += _log_sigmoid_scalar(z)
        else:
            total += _log_sigmoid_scalar(-z)
        if z >= 0.0:
            u = np.exp(-z)
            prob = 1.0 / (1.0 + u)
        else:
            u = np.exp(z)
            prob = u / (1.0 + u)
        c = (1.0 if y[r] == 1 else 0.0) - prob
        for i in range(k):
            H[p, i] += c * X[r, i]
    grad = np.zeros((k, k))
    for a in range(n_actions):
        for b in range(n_actions):
            p = a * n_actions + b
            for i in range(k):
                h = H[p, i]
                if h == 0.0:
                    continue
                for j in range(k):
                    grad[i, j] += h * (A[a, j] - A[b, j])
    return total / n, grad / n
