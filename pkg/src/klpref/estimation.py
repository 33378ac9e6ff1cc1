"""Maximum-likelihood fitting and the Gram-matrix bonus machinery.

Both model families are fitted by full-batch projected gradient ascent
on the mean log-likelihood, with backtracking (halving) line search and
an Armijo sufficient-increase test. Parameters live in boxes: tensor
entries in [0, 1], reward-matrix entries in [0, 1/k^2]. The objective is
concave for the Bradley-Terry family, so the box-projected ascent finds
the constrained optimum; the tensor objective is ascended to a
stationary point from the warm start.

An enumerated-class fitter is also provided for tests with small
explicit model classes: it scores every candidate's log-likelihood and
returns the best.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from klpref import _kernels
from klpref.core import BTParams, GPParams, Instance, ModelParams
from klpref.data import PreferenceDataset
from klpref.errors import DegeneratePairError, EmptyDatasetError, ZeroTensorError
from klpref.models import bt_entry_bound


@dataclass(frozen=True)
class OptimizerConfig:
    max_iter: int = 500
    tol: float = 1e-6          # projected-gradient max-norm
    armijo: float = 1e-4
    step_init: float = 1.0
    step_min: float = 1e-14
    step_grow: float = 2.0


@dataclass
class FitResult:
    params: np.ndarray
    loglik: float
    grad_norm: float
    iterations: int
    step_size: float


def _run_fit(kernel, theta0, views, actions, lo, hi, cfg, step0):
    """Invoke a backend fit driver and wrap the outcome."""
    X, a1, a2, y = views
    theta, ll, gnorm, iters, step = kernel(
        np.ascontiguousarray(theta0, dtype=np.float64).ravel(),
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(actions, dtype=np.float64),
        np.ascontiguousarray(a1, dtype=np.int64),
        np.ascontiguousarray(a2, dtype=np.int64),
        np.ascontiguousarray(y, dtype=np.int64),
        float(lo),
        float(hi),
        int(cfg.max_iter),
        float(cfg.tol),
        float(cfg.armijo),
        float(cfg.step_init if step0 is None else step0),
        float(cfg.step_min),
        float(cfg.step_grow),
    )
    if iters < 0:
        raise DegeneratePairError(
            "log-likelihood is -inf at the starting point; a record has "
            "zero probability under the warm start"
        )
    return FitResult(
        params=theta, loglik=float(ll), grad_norm=float(gnorm),
        iterations=int(iters), step_size=float(step),
    )


def default_gp_warm_start(k: int) -> np.ndarray:
    return np.full((k, k, k), 0.5)


def default_bt_warm_start(k: int) -> np.ndarray:
    return np.full((k, k), 0.5 * bt_entry_bound(k))


def bt_diff_features(X, actions, a1_idx, a2_idx) -> np.ndarray:
    """Feature differences phi(x, a1) - phi(x, a2) with phi = vec(x a^T)."""
    V = actions[a1_idx] - actions[a2_idx]
    n, k = X.shape
    return (X[:, :, None] * V[:, None, :]).reshape(n, k * k)


def fit_bt_mle(
    dataset: PreferenceDataset,
    actions: np.ndarray,
    warm_start: Optional[np.ndarray] = None,
    cfg: OptimizerConfig = OptimizerConfig(),
    step0: Optional[float] = None,
) -> FitResult:
    """Fit the reward matrix by box-constrained logistic regression."""
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot fit a reward model on an empty dataset")
    k = dataset.k
    w0 = default_bt_warm_start(k) if warm_start is None else np.asarray(warm_start)
    res = _run_fit(
        _kernels.bt_fit, w0, dataset.views(), actions, 0.0, bt_entry_bound(k), cfg, step0
    )
    res.params = res.params.reshape(k, k)
    return res


def fit_gp_mle(
    dataset: PreferenceDataset,
    actions: np.ndarray,
    warm_start: Optional[np.ndarray] = None,
    cfg: OptimizerConfig = OptimizerConfig(),
    step0: Optional[float] = None,
) -> FitResult:
    """Fit the preference tensor by projected gradient ascent.

    Entries are clamped to [0, 1], the span of the sampled ground truth;
    the preference ratio is scale invariant, so the upper clamp costs no
    expressiveness.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot fit a preference model on an empty dataset")
    k = dataset.k
    M0 = default_gp_warm_start(k) if warm_start is None else np.asarray(warm_start)
    M0 = np.clip(M0, 0.0, 1.0)
    if not np.any(M0 > 0.0):
        raise ZeroTensorError("projection left the warm-start tensor all zero")
    res = _run_fit(_kernels.gp_fit, M0, dataset.views(), actions, 0.0, 1.0, cfg, step0)
    res.params = res.params.reshape(k, k, k)
    if not np.any(res.params > 0.0):
        raise ZeroTensorError("projection drove every tensor entry to zero")
    return res


def gp_dataset_loglik(M, dataset, actions) -> float:
    X, a1, a2, y = dataset.views()
    return _kernels.gp_loglik(
        np.ascontiguousarray(M),
        np.ascontiguousarray(X),
        np.ascontiguousarray(actions),
        np.ascontiguousarray(a1),
        np.ascontiguousarray(a2),
        np.ascontiguousarray(y),
    )


def bt_dataset_loglik(W, dataset, actions) -> float:
    X, a1, a2, y = dataset.views()
    return _kernels.bt_loglik(
        np.ascontiguousarray(W),
        np.ascontiguousarray(X),
        np.ascontiguousarray(actions),
        np.ascontiguousarray(a1),
        np.ascontiguousarray(a2),
        np.ascontiguousarray(y),
    )


def fit_enumerated(
    dataset: PreferenceDataset,
    actions: np.ndarray,
    candidates: Sequence[ModelParams],
):
    """Pick the candidate model with the largest log-likelihood.

    Ties resolve to the earliest candidate. This is the literal
    finite-class estimator; the parametric fitters above are the default
    for experiments.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot score candidates on an empty dataset")
    if not candidates:
        raise ValueError("candidate list is empty")
    scores = []
    for cand in candidates:
        if isinstance(cand, GPParams):
            scores.append(gp_dataset_loglik(cand.tensor, dataset, actions))
        else:
            scores.append(bt_dataset_loglik(cand.matrix, dataset, actions))
    best = int(np.argmax(scores))
    return candidates[best], best, scores


# ---------------------------------------------------------------------------
# Gram matrix and elliptical bonus (Bradley-Terry optimism baseline)
# ---------------------------------------------------------------------------


def phi_feature(x, a) -> np.ndarray:
    """Linear feature of a context-action pair: vec(x a^T)."""
    return np.outer(np.asarray(x), np.asarray(a)).ravel()


def estimate_phi_ref_mean(
    instance: Instance, seed: int, n_samples: int = 10_000
) -> np.ndarray:
    """Monte Carlo estimate of the mean reference feature E_x[phi(x, pi0)].

    Drawn once at initialization and fixed thereafter; the inner
    expectation over actions is an exact sum.
    """
    rng = np.random.default_rng(seed)
    xs = instance.context_dist.sample(rng, n_samples)
    abar = instance.ref_policy @ instance.actions
    phis = (xs[:, :, None] * abar[None, None, :]).reshape(n_samples, -1)
    return phis.mean(axis=0)


@dataclass
class GramState:
    """Regularized Gram matrix of centered features and its bonus norm."""

    lam: float
    phi_ref_mean: np.ndarray
    sigma: np.ndarray = field(default=None)
    _chol: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        d = self.phi_ref_mean.shape[0]
        if self.sigma is None:
            self.sigma = self.lam * np.eye(d)
        self._chol = None

    def copy(self) -> "GramState":
        return GramState(
            lam=self.lam,
            phi_ref_mean=self.phi_ref_mean,
            sigma=self.sigma.copy(),
        )

    def update(self, x, a_vec) -> None:
        """Rank-one update with the centered feature of (x, a)."""
        centered = phi_feature(x, a_vec) - self.phi_ref_mean
        self.sigma += np.outer(centered, centered)
        self._chol = None

    def _factor(self) -> np.ndarray:
        if self._chol is None:
            self._chol = np.linalg.cholesky(self.sigma)
        return self._chol

    def bonus(self, x, a_vec, beta: float) -> float:
        """beta * || phi(x, a) - phi_ref_mean ||_{Sigma^-1}."""
        centered = phi_feature(x, a_vec) - self.phi_ref_mean
        L = self._factor()
        u = np.linalg.solve(L, centered)
        return float(beta) * float(np.sqrt(u @ u))

    def bonus_many(self, Phi: np.ndarray, beta: float) -> np.ndarray:
        """Bonuses for precomputed raw features, shape (m, d)."""
        centered = Phi - self.phi_ref_mean[None, :]
        L = self._factor()
        U = np.linalg.solve(L, centered.T)
        return float(beta) * np.sqrt(np.einsum("dm,dm->m", U, U))


@dataclass
class EstimatorState:
    """Current estimate plus optimizer scratch and optional Gram state."""

    kind: str                      # "gp" or "bt"
    params: np.ndarray             # tensor (k,k,k) or matrix (k,k)
    opt: OptimizerConfig = field(default_factory=OptimizerConfig)
    step_size: Optional[float] = None
    grad_norm: float = np.inf
    n_obs: int = 0
    gram: Optional[GramState] = None

    def model_params(self) -> ModelParams:
        if self.kind == "gp":
            return GPParams(self.params)
        return BTParams(self.params)

    def snapshot(self) -> "EstimatorState":
        return EstimatorState(
            kind=self.kind,
            params=self.params.copy(),
            opt=self.opt,
            step_size=self.step_size,
            grad_norm=self.grad_norm,
            n_obs=self.n_obs,
            gram=self.gram.copy() if self.gram is not None else None,
        )

    def refit(self, dataset: PreferenceDataset, actions: np.ndarray) -> None:
        """Refit on all data, warm-starting from the current estimate."""
        if self.kind == "gp":
            res = fit_gp_mle(dataset, actions, self.params, self.opt, self.step_size)
        else:
            res = fit_bt_mle(dataset, actions, self.params, self.opt, self.step_size)
        self.params = res.params
        self.step_size = res.step_size
        self.grad_norm = res.grad_norm
        self.n_obs = len(dataset)
