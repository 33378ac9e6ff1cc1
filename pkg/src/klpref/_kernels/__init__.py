"""Dispatch to the numba or numpy kernel implementation.

The active module is chosen once at import time from ``KLPREF_BACKEND``
(see :mod:`klpref.backend`). Both implementations share signatures and
semantics; tests compare them directly.
"""

from klpref.backend import ACTIVE_BACKEND

if ACTIVE_BACKEND == "numba":
    from klpref._kernels import numba_impl as impl
else:
    from klpref._kernels import numpy_impl as impl

NAME = impl.NAME
gibbs_rows = impl.gibbs_rows
nash_solve_batch = impl.nash_solve_batch
gp_scores = impl.gp_scores
gp_loglik = impl.gp_loglik
gp_loglik_grad = impl.gp_loglik_grad
gp_fit = impl.gp_fit
bt_loglik = impl.bt_loglik
bt_loglik_grad = impl.bt_loglik_grad
bt_fit = impl.bt_fit

__all__ = [
    "NAME",
    "gibbs_rows",
    "nash_solve_batch",
    "gp_scores",
    "gp_loglik",
    "gp_loglik_grad",
    "gp_fit",
    "bt_loglik",
    "bt_loglik_grad",
    "bt_fit",
]
