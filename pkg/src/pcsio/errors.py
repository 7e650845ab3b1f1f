"""Exception hierarchy shared by the analysis modules and the CLI."""


class PcsioError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PcsioError, ValueError):
    """Malformed or inconsistent input data (schema violations, bad ranges)."""


class PreconditionError(PcsioError):
    """An analysis was asked for outside the hypotheses under which it is valid."""


class ZeroLimitError(PreconditionError):
    """A one-sided limit a(t+-0) vanishes where the analysis requires it not to."""

    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"one-sided limit of the coefficient vanishes at t={t}")


class InsufficientScaleError(PreconditionError):
    """Sampling does not resolve enough decades of scale for a fit or a limit."""


class ConvergenceError(PcsioError):
    """A numerical limit (limsup, root, iteration) failed to stabilise."""
