"""Simulation lab for KL-regularized contextual bandits with preference feedback.

The package implements preference models (general pairwise and Bradley-Terry),
Gibbs policies and Nash-equilibrium oracles, maximum-likelihood fitters,
online/offline greedy learners with optimism baselines, exact regret
evaluation, and a seeded experiment harness with CSV outputs.

Hot numeric kernels are JIT-compiled with numba by default; set
``KLPREF_BACKEND=numpy`` to force the pure-numpy fallback.
"""

from klpref.core import (
    BTParams,
    FiniteContexts,
    GPParams,
    Instance,
    UniformContexts,
    make_instance,
    uniform_policy,
)
from klpref.errors import (
    ConfigError,
    ContinuousContextError,
    DegeneratePairError,
    EmptyDatasetError,
    NonConvergenceError,
    RegretAnomalyError,
    SupportError,
    ZeroTensorError,
)

__all__ = [
    "BTParams",
    "ConfigError",
    "ContinuousContextError",
    "DegeneratePairError",
    "EmptyDatasetError",
    "FiniteContexts",
    "GPParams",
    "Instance",
    "NonConvergenceError",
    "RegretAnomalyError",
    "SupportError",
    "UniformContexts",
    "ZeroTensorError",
    "make_instance",
    "uniform_policy",
]

__version__ = "0.1.0"
