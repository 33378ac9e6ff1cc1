"""Exception types shared across the package."""


class KlprefError(Exception):
    """Base class for package errors."""


class DegeneratePairError(KlprefError):
    """Both bilinear forms of a preference pair are zero; the ratio is undefined."""


class NonConvergenceError(KlprefError):
    """Fixed-point iteration exhausted its budget. Carries the last residual."""

    def __init__(self, residual: float, max_iter: int):
        self.residual = float(residual)
        self.max_iter = int(max_iter)
        super().__init__(
            f"fixed-point iteration did not reach tolerance within "
            f"{max_iter} iterations (last residual {residual:.3e})"
        )


class EmptyDatasetError(KlprefError):
    """An MLE fit was requested on an empty dataset."""


class ZeroTensorError(KlprefError):
    """Projection drove every tensor entry to zero; the model is degenerate."""


class SupportError(KlprefError):
    """A policy places mass outside the reference policy's support."""


class ContinuousContextError(KlprefError):
    """Coverage coefficients need a finite context list."""


class RegretAnomalyError(KlprefError):
    """A step regret was negative beyond numerical tolerance."""


class ConfigError(KlprefError):
    """An experiment configuration failed to parse or validate."""
