"""Kernel backend selection.

The hot inner loops (Nash fixed-point iteration, MLE log-likelihoods and
gradients) exist twice: a numba ``@njit`` implementation and a pure-numpy
fallback with identical semantics. The environment variable
``KLPREF_BACKEND`` picks one:

    auto   use numba when it imports, numpy otherwise (default)
    numba  require numba, fail loudly if unavailable
    numpy  force the fallback, never import numba

The choice is made once at import time.
"""

import os

_VALID = ("auto", "numba", "numpy")


def requested_backend() -> str:
    value = os.environ.get("KLPREF_BACKEND", "auto").strip().lower()
    if value not in _VALID:
        raise ValueError(
            f"KLPREF_BACKEND must be one of {_VALID}, got {value!r}"
        )
    return value


def resolve_backend() -> str:
    """Return the backend name actually used ('numba' or 'numpy')."""
    want = requested_backend()
    if want == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if want == "numba":
            raise
        return "numpy"
    return "numba"


ACTIVE_BACKEND = resolve_backend()
