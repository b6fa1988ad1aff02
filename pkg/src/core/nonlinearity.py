"""
Nonlinearities f and their primitives F.

Every nonlinearity is modified to vanish on the negative half-line. The
hypotheses of the multiplicity theorem (double-power growth, monotone
f(s)/s, locally decreasing F(s)/s^mu) are verified on sample grids and
reported with worst-case witnesses.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from .errors import ParameterError, QuadratureError
from .validation import ParameterValidator, require

logger = logging.getLogger(__name__)

QUAD_RTOL = 1e-10
QUAD_ATOL = 0.0

# Relative slack for grid monotonicity certificates.
MONOTONE_SLACK = 1e-9


class NonlinearityKind(str, Enum):
    PURE_POWER = "pure_power"
    DOUBLE_POWER_MIN = "double_power_min"
    RATIONAL_POWER = "rational_power"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class NonlinearitySpec:
    """
    An evaluable nonlinearity with its declared growth data.

    Attributes:
        kind: Closed-form family or tabulated samples
        p1, p2: Declared growth exponents (small-s / large-s as in the
            double-power bound M min{s^(p1-1), s^(p2-1)})
        M: Growth constant
        mu: Exponent for which F(s)/s^mu decreases on (0, s_star)
        s_star: End of that interval (math.inf allowed)
        p: Exponent of the pure power
    """

    kind: NonlinearityKind
    p1: float
    p2: float
    M: float = 1.0
    mu: float = 4.0
    s_star: float = 1.0
    p: Optional[float] = None
    samples_s: Optional[tuple] = None
    samples_f: Optional[tuple] = None
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False, compare=False)
    _antideriv: Optional[object] = field(default=None, repr=False, compare=False)

    @classmethod
    def pure_power(cls, p: float, M: float = 1.0, mu: Optional[float] = None,
                   s_star: float = math.inf, p1: Optional[float] = None,
                   p2: Optional[float] = None) -> "NonlinearitySpec":
        require(ParameterValidator.validate_growth_exponent(p))
        return cls(NonlinearityKind.PURE_POWER,
                   p1=p if p1 is None else p1, p2=p if p2 is None else p2,
                   M=M, mu=p if mu is None else mu, s_star=s_star, p=p)

    @classmethod
    def double_power_min(cls, p2: float, p1: float = 3.0, M: float = 1.0,
                         mu: Optional[float] = None, s_star: float = 1.0) -> "NonlinearitySpec":
        """f(s) = min{s, s^(p2-1)}; F(s)/s^p2 is constant on (0, 1)."""
        require(ParameterValidator.validate_growth_exponent(p2, "p2"))
        return cls(NonlinearityKind.DOUBLE_POWER_MIN, p1=p1, p2=p2, M=M,
                   mu=p2 if mu is None else mu, s_star=s_star)

    @classmethod
    def rational_power(cls, p2: float, p1: float = 3.0, M: float = 1.0,
                       mu: Optional[float] = None, s_star: float = 1.0) -> "NonlinearitySpec":
        """f(s) = s^(p2-1) / (1 + s^(p2-2))."""
        require(ParameterValidator.validate_growth_exponent(p2, "p2"))
        return cls(NonlinearityKind.RATIONAL_POWER, p1=p1, p2=p2, M=M,
                   mu=p2 if mu is None else mu, s_star=s_star)

    @classmethod
    def tabulated(cls, s: Sequence[float], f: Sequence[float], p1: float, p2: float,
                  M: float = 1.0, mu: float = 4.0, s_star: float = 1.0) -> "NonlinearitySpec":
        """
        Monotone cubic interpolant of samples of f on s >= 0.

        A sample at s = 0 with value 0 is prepended when missing.
        """
        s_arr = np.asarray(s, dtype=float)
        f_arr = np.asarray(f, dtype=float)
        if s_arr.shape != f_arr.shape or s_arr.ndim != 1 or s_arr.size < 2:
            raise ParameterError("Tabulated samples must be two equal-length 1D sequences")
        if np.any(np.diff(s_arr) <= 0) or s_arr[0] < 0:
            raise ParameterError("Tabulated abscissae must be nonnegative and increasing")
        if s_arr[0] > 0:
            s_arr = np.concatenate(([0.0], s_arr))
            f_arr = np.concatenate(([0.0], f_arr))
        interp = PchipInterpolator(s_arr, f_arr, extrapolate=True)
        return cls(NonlinearityKind.TABULATED, p1=p1, p2=p2, M=M, mu=mu, s_star=s_star,
                   samples_s=tuple(s_arr), samples_f=tuple(f_arr),
                   _interp=interp, _antideriv=interp.antiderivative())

    @property
    def M_prime(self) -> float:
        """Bound constant for |F| <= M' min{|s|^p1, |s|^p2}."""
        return self.M / min(self.p1, self.p2)

    def f(self, s):
        return eval_f(self, s)

    def F(self, s):
        return eval_F(self, s)


@dataclass(frozen=True)
class Witness:
    """Worst grid point of a check and its margin (negative means violated)."""

    s: float
    margin: float


@dataclass(frozen=True)
class HypothesisReport:
    h0_ok: bool
    h1p_ok: bool
    h2p_ok: bool
    F_bound_ok: bool
    h0_witness: Witness
    h1p_witness: Witness
    h2p_witness: Optional[Witness]
    F_bound_witness: Witness
    grid_min: float
    grid_max: float
    grid_size: int

    @property
    def all_ok(self) -> bool:
        return self.h0_ok and self.h1p_ok and self.h2p_ok


def eval_f(spec: NonlinearitySpec, s):
    """
    Evaluate f, zero on s <= 0.

    Accepts scalars or arrays; returns the same shape.
    """
    s_arr = np.asarray(s, dtype=float)
    pos = np.where(s_arr > 0, s_arr, 0.0)

    if spec.kind is NonlinearityKind.PURE_POWER:
        out = pos ** (spec.p - 1)
    elif spec.kind is NonlinearityKind.DOUBLE_POWER_MIN:
        out = np.minimum(pos, pos ** (spec.p2 - 1))
    elif spec.kind is NonlinearityKind.RATIONAL_POWER:
        out = pos ** (spec.p2 - 1) / (1.0 + pos ** (spec.p2 - 2))
    else:
        out = spec._interp(pos)

    out = np.where(s_arr > 0, out, 0.0)
    return float(out) if np.ndim(s) == 0 else out


def _quad_F(spec: NonlinearitySpec, pos: np.ndarray) -> np.ndarray:
    flat = pos.reshape(-1)
    order = np.argsort(flat)
    values = np.empty_like(flat)
    # cumulative quadrature between consecutive sorted samples
    total, last = 0.0, 0.0
    for idx in order:
        x = flat[idx]
        if x > last:
            value, err = integrate.quad(lambda t: float(eval_f(spec, t)), last, x,
                                        epsrel=QUAD_RTOL, epsabs=QUAD_ATOL, limit=200)
            if err > 10 * (QUAD_RTOL * abs(value) + QUAD_ATOL):
                raise QuadratureError(f"F({x:.6g}) did not converge", err)
            total += value
            last = x
        values[idx] = total
    return values.reshape(pos.shape)


def _rational_F(p: float, pos: np.ndarray) -> np.ndarray:
    """
    int_0^s t^(p-1) / (1 + t^(p-2)) dt in closed form.

    With x = s^(p-2) this is (s^2/p) z 2F1(1, 1; (2p-2)/(p-2); z) for
    z = x / (1 + x) in [0, 1], where the series converges up to z = 1.
    """
    x = pos ** (p - 2)
    z = 1.0 - 1.0 / (1.0 + x)
    with np.errstate(invalid="ignore", over="ignore"):
        return pos * pos / p * z * special.hyp2f1(1.0, 1.0, (2.0 * p - 2.0) / (p - 2.0), z)


def eval_F(spec: NonlinearitySpec, s):
    """
    Evaluate the primitive F(s) = int_0^s f, zero on s <= 0.

    Closed forms for the pure power, min-type and rational nonlinearities,
    the exact antiderivative of the interpolant for tabulated data. Samples
    where the hypergeometric form is not finite fall back to adaptive
    quadrature (relative tolerance 1e-10).

    Raises:
        QuadratureError: If the adaptive quadrature misses its tolerance
    """
    s_arr = np.asarray(s, dtype=float)
    pos = np.where(s_arr > 0, s_arr, 0.0)

    if spec.kind is NonlinearityKind.PURE_POWER:
        out = pos ** spec.p / spec.p
    elif spec.kind is NonlinearityKind.DOUBLE_POWER_MIN:
        p2 = spec.p2
        out = np.where(pos <= 1.0, pos ** p2 / p2, 1.0 / p2 + (pos * pos - 1.0) / 2.0)
    elif spec.kind is NonlinearityKind.TABULATED:
        out = spec._antideriv(pos) - spec._antideriv(0.0)
    else:
        out = _rational_F(spec.p2, pos)
        bad = ~np.isfinite(out)
        if np.any(bad):
            logger.debug("rational F: %d samples fall back to quadrature", int(bad.sum()))
            out = np.where(bad, _quad_F(spec, np.where(bad, pos, 0.0)), out)

    out = np.where(s_arr > 0, out, 0.0)
    return float(out) if np.ndim(s) == 0 else out


def _worst(s: np.ndarray, margins: np.ndarray) -> Witness:
    i = int(np.argmin(margins))
    return Witness(float(s[i]), float(margins[i]))


def check_hypotheses(spec: NonlinearitySpec, grid: Sequence[float]) -> HypothesisReport:
    """
    Grid certificates for the growth and monotonicity hypotheses.

    Margins are relative: h0 uses (bound - f)/bound and requires f > 0;
    h1' uses the relative increment of f(s)/s between consecutive points;
    h2' uses the relative decrement of F(s)/s^mu on grid points below s_star.
    A failed check always carries the grid point with the worst margin.

    Raises:
        ParameterError: If the grid is empty, unsorted or not positive
    """
    require(ParameterValidator.validate_sample_grid(grid))
    s = np.asarray(grid, dtype=float)

    f = eval_f(spec, s)
    F = eval_F(spec, s)
    bound = spec.M * np.minimum(s ** (spec.p1 - 1), s ** (spec.p2 - 1))
    h0_margin = np.where(f > 0, (bound - f) / bound, -1.0)
    h0_w = _worst(s, h0_margin)
    h0_ok = h0_w.margin >= -MONOTONE_SLACK

    F_bound = spec.M_prime * np.minimum(s ** spec.p1, s ** spec.p2)
    F_margin = (F_bound - F) / F_bound
    F_w = _worst(s, F_margin)

    if s.size > 1:
        q = f / s
        scale = np.maximum(np.abs(q[:-1]), np.finfo(float).tiny)
        h1_margin = (q[1:] - q[:-1]) / scale
        h1_w = _worst(s[1:], h1_margin)
    else:
        h1_w = Witness(float(s[0]), 0.0)
    h1_ok = h1_w.margin >= -MONOTONE_SLACK

    below = s < spec.s_star
    h2_w = None
    h2_ok = True
    if np.count_nonzero(below) > 1:
        sb = s[below]
        r = F[below] / sb ** spec.mu
        scale = np.maximum(np.abs(r[:-1]), np.finfo(float).tiny)
        h2_margin = (r[:-1] - r[1:]) / scale
        h2_w = _worst(sb[1:], h2_margin)
        h2_ok = h2_w.margin >= -MONOTONE_SLACK

    report = HypothesisReport(
        h0_ok=bool(h0_ok), h1p_ok=bool(h1_ok), h2p_ok=bool(h2_ok),
        F_bound_ok=bool(F_w.margin >= -MONOTONE_SLACK),
        h0_witness=h0_w, h1p_witness=h1_w, h2p_witness=h2_w, F_bound_witness=F_w,
        grid_min=float(s[0]), grid_max=float(s[-1]), grid_size=int(s.size),
    )
    logger.debug("hypothesis check for %s: %s", spec.kind.value, report)
    return report
