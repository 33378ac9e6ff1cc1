"""Environment instances: action sets, reference policies, ground truth.

Policies are plain 1-D float64 arrays over the finite action set
(nonnegative, summing to one within 1e-12). Contexts and actions are
vectors in [0, 1]^k. Ground-truth models are either a nonnegative
preference tensor (general preference variant) or a reward matrix whose
bilinear values stay in [0, 1] (Bradley-Terry variant).
"""

import hashlib
from dataclasses import dataclass, field
from typing import Union

import numpy as np

DISTRIBUTION_ATOL = 1e-12


def uniform_policy(n_actions: int) -> np.ndarray:
    return np.full(n_actions, 1.0 / n_actions)


def validate_distribution(probs: np.ndarray, name: str = "policy") -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError(f"{name} must be a 1-D probability vector")
    if np.any(probs < 0.0):
        raise ValueError(f"{name} has negative entries")
    total = float(probs.sum())
    if abs(total - 1.0) > DISTRIBUTION_ATOL:
        raise ValueError(f"{name} sums to {total!r}, not 1 within 1e-12")
    return probs


@dataclass(frozen=True)
class UniformContexts:
    """Contexts drawn i.i.d. uniform over [0, 1]^k."""

    k: int

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.random((size, self.k))

    @property
    def finite(self) -> bool:
        return False


@dataclass(frozen=True)
class FiniteContexts:
    """Contexts drawn uniformly from an explicit list of vectors."""

    contexts: np.ndarray

    def __post_init__(self):
        ctx = np.atleast_2d(np.asarray(self.contexts, dtype=np.float64))
        object.__setattr__(self, "contexts", ctx)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(0, self.contexts.shape[0], size=size)
        return self.contexts[idx]

    @property
    def finite(self) -> bool:
        return True


ContextDistribution = Union[UniformContexts, FiniteContexts]


@dataclass(frozen=True)
class GPParams:
    """General preference model: nonnegative k x k x k tensor."""

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=np.float64)
        if t.ndim != 3 or len(set(t.shape)) != 1:
            raise ValueError("preference tensor must be k x k x k")
        if np.any(t < 0.0):
            raise ValueError("preference tensor entries must be nonnegative")
        object.__setattr__(self, "tensor", t)

    @property
    def kind(self) -> str:
        return "gp"

    @property
    def k(self) -> int:
        return self.tensor.shape[0]


@dataclass(frozen=True)
class BTParams:
    """Bradley-Terry model: k x k reward matrix with entries in [0, 1].

    The entry box matches the sampled ground-truth space; rewards
    x^T W a are then nonnegative and bounded by k^2 on the unit cube.
    """

    matrix: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.matrix, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("reward matrix must be k x k")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("reward matrix entries must lie in [0, 1]")
        object.__setattr__(self, "matrix", w)

    @property
    def kind(self) -> str:
        return "bt"

    @property
    def k(self) -> int:
        return self.matrix.shape[0]


ModelParams = Union[GPParams, BTParams]


@dataclass(frozen=True, eq=False)
class Instance:
    """A fully specified environment for one experiment.

    Invariants checked on construction: at least two actions, action
    coordinates in [0, 1], strictly positive reference policy, positive
    regularization strength.
    """

    k: int
    actions: np.ndarray
    eta: float
    ref_policy: np.ndarray
    params: ModelParams
    context_dist: ContextDistribution = field(default=None)

    def __post_init__(self):
        actions = np.asarray(self.actions, dtype=np.float64)
        if actions.ndim != 2 or actions.shape[1] != self.k:
            raise ValueError("actions must be an (n_actions, k) array")
        if actions.shape[0] < 2:
            raise ValueError("need at least two actions")
        if np.any(actions < 0.0) or np.any(actions > 1.0):
            raise ValueError("action coordinates must lie in [0, 1]")
        object.__setattr__(self, "actions", actions)
        ref = validate_distribution(self.ref_policy, "ref_policy")
        if np.any(ref <= 0.0):
            raise ValueError("ref_policy must be strictly positive everywhere")
        object.__setattr__(self, "ref_policy", ref)
        if not self.eta > 0.0:
            raise ValueError("eta must be positive")
        if self.params.k != self.k:
            raise ValueError("model parameter dimension does not match k")
        if self.context_dist is None:
            object.__setattr__(self, "context_dist", UniformContexts(self.k))

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]

    @property
    def variant(self) -> str:
        return self.params.kind

    def sample_context(self, rng: np.random.Generator) -> np.ndarray:
        return self.context_dist.sample(rng, 1)[0]

    def fingerprint(self) -> str:
        """Stable hex digest of everything that defines this instance."""
        h = hashlib.sha256()
        h.update(f"k={self.k};eta={self.eta!r};variant={self.variant};".encode())
        h.update(self.actions.tobytes())
        h.update(self.ref_policy.tobytes())
        if isinstance(self.params, GPParams):
            h.update(self.params.tensor.tobytes())
        else:
            h.update(self.params.matrix.tobytes())
        if isinstance(self.context_dist, FiniteContexts):
            h.update(b"finite")
            h.update(self.context_dist.contexts.tobytes())
        else:
            h.update(b"uniform")
        return h.hexdigest()


def make_instance(
    k: int = 5,
    n_actions: int = 6,
    variant: str = "gp",
    seed: int = 0,
    eta: float = 1.0,
    n_finite_contexts: int = 0,
) -> Instance:
    """Sample a ground-truth instance.

    Actions are uniform in [0, 1]^k; the preference tensor and the
    reward matrix are uniform in [0, 1] entrywise. The reference policy
    is uniform over the action set. ``n_finite_contexts > 0`` replaces
    the continuous context distribution with an explicit sampled list.
    """
    rng = np.random.default_rng(seed)
    actions = rng.random((n_actions, k))
    if variant == "gp":
        params: ModelParams = GPParams(rng.random((k, k, k)))
    elif variant == "bt":
        params = BTParams(rng.random((k, k)))
    else:
        raise ValueError(f"unknown model variant {variant!r}")
    ctx: ContextDistribution = UniformContexts(k)
    if n_finite_contexts > 0:
        ctx = FiniteContexts(rng.random((n_finite_contexts, k)))
    return Instance(
        k=k,
        actions=actions,
        eta=eta,
        ref_policy=uniform_policy(n_actions),
        params=params,
        context_dist=ctx,
    )
