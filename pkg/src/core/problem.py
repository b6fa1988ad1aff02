"""
Problem instance -Lap u + A|x|^-alpha u = f(u) in R^N.
"""

import math
from dataclasses import dataclass

from scipy.special import gamma

from .nonlinearity import NonlinearitySpec
from .validation import ParameterValidator, require


def sphere_area(d: int) -> float:
    """(d-1)-dimensional measure of the unit sphere of R^d."""
    return 2.0 * math.pi ** (d / 2.0) / float(gamma(d / 2.0))


@dataclass(frozen=True)
class ProblemParams:
    """Full problem instance (N, alpha, A, f)."""

    N: int
    alpha: float
    A: float
    nonlinearity: NonlinearitySpec

    def __post_init__(self):
        require(ParameterValidator.validate_dimension(self.N))
        require(ParameterValidator.validate_alpha(self.alpha))
        require(ParameterValidator.validate_coupling(self.A))

    def with_coupling(self, A: float) -> "ProblemParams":
        return ProblemParams(self.N, self.alpha, A, self.nonlinearity)

    @property
    def natural_length(self) -> float:
        """
        Length scale on which solutions live.

        For a pure power the functional is invariant under u -> k u(x/l)
        with l = A^(1/(alpha-2)). Double-power nonlinearities behave like
        their small-amplitude power in that regime, so the same l is used.
        At alpha = 2 the potential is scale-free and l = 1.
        """
        if self.alpha == 2:
            return 1.0
        return self.A ** (1.0 / (self.alpha - 2.0))
