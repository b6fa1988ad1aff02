"""
Exception hierarchy for the numerical core.

All errors raised on purpose by the suite derive from SuiteError so the
command layer can map them onto exit codes.
"""

from typing import Optional, Tuple


class SuiteError(Exception):
    """Base class for every error raised by the suite."""
    pass


class ParameterError(SuiteError, ValueError):
    """Raised when a problem parameter or argument is out of range."""
    pass


class QuadratureError(SuiteError):
    """Raised when an adaptive quadrature misses its tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class SolverError(SuiteError):
    """Base class for failures of the discrete solvers."""
    pass


class NoSignChangeError(SolverError):
    """The Nehari derivative g'(t) stays positive on the search interval."""

    def __init__(self, interval: Tuple[float, float]):
        super().__init__(
            f"g'(t) > 0 on [{interval[0]:.3e}, {interval[1]:.3e}]: "
            "no point of the Nehari manifold along this ray"
        )
        self.interval = interval


class MaxIterationsError(SolverError):
    """Descent did not reach tolerance; carries the best iterate so far."""

    def __init__(self, message: str, field=None, report=None):
        super().__init__(message)
        self.field = field
        self.report = report


class LinearSolveError(SolverError):
    """Factorization or back-substitution of the A-metric failed."""

    def __init__(self, message: str, cause: Optional[Exception] = None):
        super().__init__(message if cause is None else f"{message}: {cause}")
        self.cause = cause


class ConfigError(SuiteError):
    """Raised when a run configuration cannot be loaded or validated."""
    pass


class OutputError(SuiteError):
    """Raised when results cannot be written."""
    pass
