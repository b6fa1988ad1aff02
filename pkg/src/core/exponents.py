"""
Exponent algebra for -Lap u + A|x|^-alpha u = f(u).

Closed-form thresholds 2*, 2_alpha, 2*_alpha and p*_alpha, the classifier
of the (alpha, p) plane into existence/nonexistence regions, the
multiplicity count nu and the theorem applicability check.

Inputs are converted to ``Fraction`` (floats exactly, via their binary
value) so identities and ceilings are evaluated in rational arithmetic.
Infinite thresholds are represented by ``math.inf``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Real
from typing import List, Optional, Sequence, Tuple, Union

from .errors import ParameterError
from .validation import ParameterValidator, require

logger = logging.getLogger(__name__)

Exponent = Union[Fraction, float]

# Slack used when snapping a floating input onto a region boundary.
BOUNDARY_SLACK = 1e-12


def _q(x: Real) -> Fraction:
    """Exact rational value of a real input."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def _cmp(a: Exponent, b: Exponent) -> int:
    """Three-way comparison with boundary snapping for finite values."""
    if math.isinf(a) or math.isinf(b):
        return (a > b) - (a < b)
    if a == b:
        return 0
    scale = max(1.0, abs(float(a)), abs(float(b)))
    if abs(float(a - b)) <= BOUNDARY_SLACK * scale:
        return 0
    return 1 if a > b else -1


@dataclass(frozen=True)
class ExponentSet:
    """The four thresholds of the (alpha, p) plane for a given (N, alpha)."""

    N: int
    alpha: Fraction
    two_star: Fraction
    two_alpha: Exponent
    two_star_alpha: Exponent
    # None where undefined (alpha = 2 or alpha >= 2N - 2)
    p_star_alpha: Optional[Fraction]

    def as_floats(self) -> dict:
        return {
            "two_star": float(self.two_star),
            "two_alpha": float(self.two_alpha),
            "two_star_alpha": float(self.two_star_alpha),
            "p_star_alpha": None if self.p_star_alpha is None else float(self.p_star_alpha),
        }


class Region(str, Enum):
    NO_SOLUTION = "NoSolution"
    NO_RADIAL_SOLUTION = "NoRadialSolution"
    RADIAL_EXISTS = "RadialExists"
    EXPLICIT_RADIAL = "ExplicitRadial"
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class RegionLabel:
    """Region of the (alpha, p) plane with the sources establishing it."""

    region: Region
    citations: Tuple[str, ...] = ()

    def citation_string(self) -> str:
        return ";".join(self.citations)


@dataclass(frozen=True)
class TheoremHypotheses:
    """Dimension, potential exponent and double-power growth exponents."""

    N: int
    alpha: float
    p1: float
    p2: float


@dataclass(frozen=True)
class ApplicabilityReport:
    applicable: bool
    nu: Optional[int] = None
    k_range: Tuple[int, ...] = ()
    reason: str = ""


def two_star(N: int) -> Fraction:
    """Critical Sobolev exponent 2N/(N-2)."""
    return Fraction(2 * N, N - 2)


def exponent_set(N: int, alpha: Real) -> ExponentSet:
    """
    Compute 2*, 2_alpha, 2*_alpha and p*_alpha.

    Args:
        N: Dimension, N >= 3
        alpha: Potential exponent, alpha > 0

    Returns:
        ExponentSet: thresholds, with math.inf where a denominator is <= 0
        and p_star_alpha = None where it is undefined

    Raises:
        ParameterError: If N < 3 or alpha <= 0
    """
    require(ParameterValidator.validate_dimension(N))
    require(ParameterValidator.validate_alpha(alpha))

    a = _q(alpha)
    ts = two_star(N)

    two_alpha = Fraction(2 * N) / (N - a) if a < N else math.inf

    if a < 2 * N - 2:
        two_star_alpha = 2 * (2 * N - 2 + a) / (2 * N - 2 - a)
    else:
        two_star_alpha = math.inf

    if a < 2:
        num = a * a * (N - 1) - 2 * a * (N - 1) + 4 * N
        den = a * a * (N - 1) - 2 * a * (N + 1) + 4 * N
        p_star = 2 * num / den
    elif 2 < a < 2 * N - 2:
        p_star = 2 * (2 * N + 2 - a) / (2 * N - 2 - a)
    else:
        p_star = None

    return ExponentSet(N, a, ts, two_alpha, two_star_alpha, p_star)


def classify_region(N: int, alpha: Real, p: Real) -> RegionLabel:
    """
    Label the point (alpha, p) of the plane for dimension N.

    Boundary lines follow the closures of the quoted inequalities: the lines
    p = 2* (alpha != 2) and alpha = 2 (p != 2*) carry no solution, the pair
    (2, 2*) has the explicit radial family.

    Raises:
        ParameterError: If p <= 2 or (N, alpha) is invalid
    """
    require(ParameterValidator.validate_growth_exponent(p))
    ex = exponent_set(N, alpha)
    a, q = ex.alpha, _q(p)

    at_two = _cmp(a, 2) == 0
    at_critical = _cmp(q, ex.two_star) == 0

    if at_two and at_critical:
        return RegionLabel(Region.EXPLICIT_RADIAL, ("[21]",))
    if at_two or at_critical:
        return RegionLabel(Region.NO_SOLUTION, ("[21]",))

    if a < 2:
        if _cmp(q, ex.two_star) > 0:
            return RegionLabel(Region.NO_SOLUTION, ("[11]",))
        if _cmp(q, ex.two_alpha) <= 0:
            return RegionLabel(Region.NO_SOLUTION, ("[7]",))
        if _cmp(q, ex.two_star_alpha) <= 0:
            return RegionLabel(Region.NO_RADIAL_SOLUTION, ("[3]",))
        return RegionLabel(Region.RADIAL_EXISTS, ("[19,20]",))

    if _cmp(q, ex.two_star) < 0:
        return RegionLabel(Region.NO_SOLUTION, ("[11]",))
    if a < N and _cmp(q, ex.two_alpha) >= 0:
        return RegionLabel(Region.NO_SOLUTION, ("[7]",))
    if a >= 2 * N - 2 or _cmp(q, ex.two_star_alpha) < 0:
        return RegionLabel(Region.RADIAL_EXISTS, ("[19,20]",))
    return RegionLabel(Region.NO_RADIAL_SOLUTION, ("[10]",))


def radial_existence_bands(N: int, alpha: Real) -> List[Tuple[str, Exponent, Exponent]]:
    """
    Nested radial-existence intervals in p obtained over time for a given alpha.

    Returns (source, lower, upper) open intervals; the last one is the
    widest and coincides with the RadialExists region.
    """
    ex = exponent_set(N, alpha)
    a, ts = ex.alpha, ex.two_star
    if _cmp(a, 2) == 0:
        return []
    shift = (a - 2) / (N - 2)
    bands = []
    for source, width in (("[11]", shift), ("[7]", 2 * shift)):
        lo, hi = sorted((ts, ts + width))
        bands.append((source, lo, hi))
    if a < 2:
        bands.append(("[19,20]", ex.two_star_alpha, ts))
    else:
        bands.append(("[19,20]", ts, ex.two_star_alpha))
    return bands


def p_star_curve(N: int, alphas: Sequence[float]) -> List[Tuple[float, Optional[float]]]:
    """Samples (alpha, p*_alpha) of the curve p = p*_alpha; None where undefined."""
    curve = []
    for alpha in alphas:
        ex = exponent_set(N, alpha)
        value = None if ex.p_star_alpha is None else float(ex.p_star_alpha)
        curve.append((float(alpha), value))
    return curve


def _nu_bounds(N: int, alpha: Real) -> None:
    require(ParameterValidator.validate_dimension(N))
    require(ParameterValidator.validate_alpha(alpha, allow_two=False))
    if alpha >= 2 * N - 2:
        raise ParameterError(f"alpha must lie in (0, {2 * N - 2}) excluding 2")


def radial_level_exponent(N: int, alpha: Real, p1: Real, p2: Real) -> Fraction:
    """
    Min-form of the radial level exponent.

    min{(N-1)/alpha, (N-2)/(2-alpha) (2*-p1)/(p1-2)} for alpha < 2 and
    min{(N-1)/alpha, (N-2)/(alpha-2) (p2-2*)/(p2-2)} for alpha > 2.
    """
    _nu_bounds(N, alpha)
    a, ts = _q(alpha), two_star(N)
    if a < 2:
        q1 = _q(p1)
        second = Fraction(N - 2) / (2 - a) * (ts - q1) / (q1 - 2)
    else:
        q2 = _q(p2)
        second = Fraction(N - 2) / (a - 2) * (q2 - ts) / (q2 - 2)
    return min(Fraction(N - 1) / a, second)


def existence_exponent(N: int, alpha: Real, p1: Real, p2: Real) -> Tuple[Fraction, Fraction]:
    """
    Effective exponent p and the lower-bound exponent of the radial level.

    p = max{2*_alpha, p1} if alpha < 2, min{2*_alpha, p2} if alpha > 2; the
    level exponent is (N-2)/(alpha-2) (p-2*)/(p-2).

    Returns:
        tuple: (p, exponent)
    """
    _nu_bounds(N, alpha)
    ex = exponent_set(N, alpha)
    a = ex.alpha
    if a < 2:
        p = max(ex.two_star_alpha, _q(p1))
    else:
        p = min(ex.two_star_alpha, _q(p2))
    return p, scaling_exponent(N, alpha, p)


def scaling_exponent(N: int, alpha: Real, p: Real) -> Fraction:
    """(N-2)/(alpha-2) (p-2*)/(p-2): A-scaling of the pure-power radial level."""
    a, q = _q(alpha), _q(p)
    if a == 2:
        raise ParameterError("alpha = 2 has no scaling exponent")
    return Fraction(N - 2) / (a - 2) * (q - two_star(N)) / (q - 2)


def cylindrical_bound_exponent(N: int, alpha: Real, K: int) -> Fraction:
    """A-exponent of the mountain-pass upper bound for the K-symmetric class."""
    require(ParameterValidator.validate_symmetry_index(N, K))
    a = _q(alpha)
    base = Fraction(K - 1, 2)
    if a < 2:
        return base + N * (1 / a - Fraction(1, 2))
    return base


def nu(N: int, alpha: Real, p1: Real, p2: Real) -> int:
    """
    Number of nonradial solutions guaranteed for large A.

    Only p1 is used when alpha < 2 and only p2 when alpha > 2.

    Raises:
        ParameterError: If alpha = 2 or alpha is outside (0, 2N-2)
    """
    _nu_bounds(N, alpha)
    a = _q(alpha)
    value = 2 * radial_level_exponent(N, alpha, p1, p2)
    if a < 2:
        value -= 2 * N * (1 / a - Fraction(1, 2))
    return math.ceil(value) - 1


def admissible_symmetries(N: int, alpha: Real, p1: Real, p2: Real) -> List[int]:
    """
    K values whose cylindrical bound exponent is below the radial one.

    Under the theorem hypotheses this is exactly 2, ..., nu + 1.
    """
    target = radial_level_exponent(N, alpha, p1, p2)
    a = _q(alpha)
    shift = N * (1 / a - Fraction(1, 2)) if a < 2 else 0
    ks = []
    for K in range(2, N - 1):
        if Fraction(K - 1, 2) + shift < target:
            ks.append(K)
    return ks


def theorem_applicability(h: TheoremHypotheses) -> ApplicabilityReport:
    """
    Check the hypotheses of the multiplicity theorem.

    Valid iff N >= 4, alpha in (2/(N-1), 2N-2) minus {2}, and
    (alpha < 2, 2 < p1 < p*_alpha, p2 > 2*) or (alpha > 2, 2 < p1 < 2*, p2 > p*_alpha).
    Invalid input is reported, never raised.
    """
    N, alpha, p1, p2 = h.N, h.alpha, h.p1, h.p2

    valid, error = ParameterValidator.validate_dimension(N, minimum=4)
    if not valid:
        return ApplicabilityReport(False, reason=error)

    valid, error = ParameterValidator.validate_alpha(alpha, allow_two=False)
    if not valid:
        return ApplicabilityReport(False, reason=error)

    a = _q(alpha)
    if not (Fraction(2, N - 1) < a < 2 * N - 2):
        return ApplicabilityReport(False, reason=f"alpha must lie in (2/{N - 1}, {2 * N - 2})")

    for name, value in (("p1", p1), ("p2", p2)):
        valid, error = ParameterValidator.validate_growth_exponent(value, name)
        if not valid:
            return ApplicabilityReport(False, reason=error)

    ex = exponent_set(N, alpha)
    q1, q2 = _q(p1), _q(p2)
    if a < 2:
        ok = q1 < ex.p_star_alpha and q2 > ex.two_star
        reason = "requires 2 < p1 < p*_alpha and p2 > 2*"
    else:
        ok = q1 < ex.two_star and q2 > ex.p_star_alpha
        reason = "requires 2 < p1 < 2* and p2 > p*_alpha"
    if not ok:
        return ApplicabilityReport(False, reason=reason)

    count = nu(N, alpha, p1, p2)
    logger.debug("theorem applies for N=%s alpha=%s: nu=%d", N, alpha, count)
    return ApplicabilityReport(True, nu=count, k_range=tuple(range(2, count + 2)))
