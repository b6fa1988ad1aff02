"""
Radial ground states of -Lap u + A|x|^-alpha u = f(u).

The energy restricted to radial functions is discretized with P1 elements
on a graded mesh r_0 < ... < r_n: the stiffness is tridiagonal with exact
cell integrals of r^(N-1), the potential is diagonal with exact dual-cell
integrals of r^(N-1-alpha), and int F(u) is lumped on the dual cells.
The ball r < r_0 is dropped (natural condition there), u(r_n) = 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .descent import DiscreteFunctional, SolveReport, Tolerances
from .errors import NoSignChangeError, ParameterError, SuiteError
from .exponents import existence_exponent, radial_level_exponent
from .grids import Field1D, RadialGrid
from .problem import ProblemParams

logger = logging.getLogger(__name__)

RADIAL_COLUMNS = ["A", "level", "iterations", "residual", "min_value", "error"]

# Doublings of the start width tried before giving up on a Nehari point.
WIDEN_STEPS = 8


@dataclass
class RadialOperator:
    """Assembled radial discretization of one problem instance."""

    params: ProblemParams
    grid: RadialGrid
    functional: DiscreteFunctional

    def field(self, values: np.ndarray) -> Field1D:
        return Field1D(values, self.grid)

    def norm2(self, u: Field1D) -> float:
        """||u||_A^2."""
        return self.functional.form(u.values)

    def potential_norm2(self, u: Field1D) -> float:
        """A int |x|^-alpha u^2."""
        return self.functional.potential_form(u.values)

    def inner(self, u: Field1D, v: Field1D) -> float:
        return self.functional.inner(u.values, v.values)


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares power law level ~ C A^slope with reference exponents."""

    slope: float
    intercept: float
    points: int
    existence_exponent: Optional[float] = None
    radial_level_exponent: Optional[float] = None


@dataclass(frozen=True)
class DilationParts:
    """Energy pieces of u(x/t) obtained from those of u."""

    t: float
    grad: float
    potential: float
    F: float

    @property
    def energy(self) -> float:
        return 0.5 * (self.grad + self.potential) - self.F


def stiffness_matrix(grid: RadialGrid) -> sp.csc_matrix:
    """Tridiagonal P1 stiffness of sigma_N int u'v' r^(N-1) dr with u(r_n) = 0."""
    k = grid.stiffness_weights()
    n = grid.size
    diag = k.copy()
    diag[1:] += k[:-1]
    off = -k[:-1]
    return sp.diags([off, diag, off], [-1, 0, 1], shape=(n, n), format="csc")


def assemble_radial(params: ProblemParams, grid: RadialGrid) -> RadialOperator:
    """
    Assemble the radial quadratic form and energy.

    Raises:
        ParameterError: If the grid dimension differs from the problem's or
            A r_0^-alpha overflows
    """
    if grid.N != params.N:
        raise ParameterError(f"Grid dimension {grid.N} differs from problem dimension {params.N}")

    r0 = grid.nodes[0]
    with np.errstate(over="ignore"):
        peak = params.A * r0 ** (-params.alpha)
    if not math.isfinite(peak):
        raise ParameterError(f"A r^-alpha overflows at the first node r = {r0:.3e}")

    potential = params.A * grid.potential_weights(params.alpha)
    functional = DiscreteFunctional(stiffness_matrix(grid), potential,
                                    grid.measure_weights(), params.nonlinearity)
    logger.debug("assembled radial operator: N=%d alpha=%g A=%g nodes=%d",
                 params.N, params.alpha, params.A, grid.nodes.size)
    return RadialOperator(params, grid, functional)


def energy(op: RadialOperator, u: Field1D) -> float:
    """Discrete I(u) = 1/2 ||u||_A^2 - int F(u)."""
    return op.functional.energy(u.values)


def grad_energy(op: RadialOperator, u: Field1D) -> Field1D:
    """Riesz representative of I'(u) in the discrete A-inner product."""
    return op.field(op.functional.gradient(u.values))


def nehari_project(op: RadialOperator, u: Field1D, tol: Tolerances = Tolerances()) -> float:
    """Smallest t > 0 with I'(tu)u = 0."""
    return op.functional.nehari_project(u.values, tol)


def gaussian_profile(grid: RadialGrid, width: float) -> Field1D:
    """exp(-(r/width)^2) at the free nodes."""
    if not width > 0:
        raise ParameterError("Profile width must be positive")
    return Field1D(np.exp(-(grid.free_nodes / width) ** 2), grid)


def ground_state_radial(op: RadialOperator, init: Field1D, tol: Tolerances = Tolerances(),
                        provenance: str = "user") -> Tuple[Field1D, SolveReport]:
    """
    Radial ground state by Nehari descent.

    Args:
        op: Assembled operator
        init: Nonzero nonnegative starting profile on op.grid
        tol: Stopping rules
        provenance: Label recorded in the report

    Returns:
        tuple: (Field1D, SolveReport); report.level estimates m_A

    Raises:
        NoSignChangeError: If init has no point on the Nehari manifold
        MaxIterationsError: With the best iterate as a Field1D
    """
    if init.grid is not op.grid and not np.array_equal(init.grid.nodes, op.grid.nodes):
        raise ParameterError("Initial field lives on a different grid")
    values, report = op.functional.descend(init.values, tol, provenance, wrap=op.field)
    return op.field(values), report


def nehari_start(op: RadialOperator, width: float, tol: Tolerances = Tolerances()) -> Field1D:
    """
    Gaussian start whose ray meets the Nehari manifold.

    For asymptotically linear f the ray t -> t u only crosses the manifold
    when ||u||_A^2 < int f(tu) u / t for large t, which narrow profiles can
    miss; the width is doubled until it does, up to a quarter of the grid.

    Raises:
        NoSignChangeError: If no width up to r_max / 4 works
    """
    w = width
    for _ in range(WIDEN_STEPS + 1):
        u = gaussian_profile(op.grid, w)
        if op.functional.meets_nehari(u.values, tol):
            if w != width:
                logger.info("start width widened from %.4g to %.4g at A=%g", width, w, op.params.A)
            return u
        if 2.0 * w > 0.25 * op.grid.r_max:
            break
        w *= 2.0
    raise NoSignChangeError((0.0, tol.t_max))


def solve_radial(params: ProblemParams, n: int = 2000, r_min: float = 1e-4, r_max: float = 60.0,
                 init_width: float = 1.0, tol: Tolerances = Tolerances()) -> Tuple[Field1D, SolveReport]:
    """
    Ground state on a geometric grid scaled by the natural length.

    r_min, r_max and init_width are in units of params.natural_length, so
    for a pure power the discrete problems at different A are exact
    rescalings of each other.
    """
    ell = params.natural_length
    grid = RadialGrid.graded(params.N, r_min * ell, r_max * ell, n)
    op = assemble_radial(params, grid)
    return ground_state_radial(op, nehari_start(op, init_width * ell, tol), tol, "gaussian")


@dataclass(frozen=True)
class RadialPoint:
    """One coupling of a radial sweep; report is None when the solve failed."""

    A: float
    report: Optional[SolveReport]
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.report is not None


def level_sweep(params: ProblemParams, A_values: Sequence[float], **kwargs) -> List[RadialPoint]:
    """Radial levels over a list of couplings; a failing point keeps its error text."""
    out = []
    for A in A_values:
        try:
            _, report = solve_radial(params.with_coupling(A), **kwargs)
        except SuiteError as exc:
            logger.warning("radial solve at A=%g failed: %s", A, exc)
            out.append(RadialPoint(A, None, str(exc)))
            continue
        logger.info("radial level at A=%g: %.10g (%d iterations)", A, report.level, report.iterations)
        out.append(RadialPoint(A, report))
    return out


def fit_level_scaling(levels: Sequence[Tuple[float, float]], N: Optional[int] = None,
                      alpha: Optional[float] = None, p1: Optional[float] = None,
                      p2: Optional[float] = None) -> ScalingFit:
    """
    Fit log(level) = intercept + slope log(A).

    When (N, alpha, p1, p2) are given the lower-bound exponent of the
    radial level and its min-form are reported alongside.

    Raises:
        ParameterError: For fewer than 3 distinct A values or nonpositive data
    """
    data = np.asarray(levels, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ParameterError("Levels must be (A, level) pairs")
    if np.unique(data[:, 0]).size < 3:
        raise ParameterError("Scaling fit needs at least 3 distinct A values")
    if np.any(data <= 0):
        raise ParameterError("A values and levels must be positive")

    x, y = np.log(data[:, 0]), np.log(data[:, 1])
    slope, intercept = np.polyfit(x, y, 1)

    ex = rem = None
    if None not in (N, alpha, p1, p2) and alpha != 2:
        ex = float(existence_exponent(N, alpha, p1, p2)[1])
        rem = float(radial_level_exponent(N, alpha, p1, p2))
    return ScalingFit(float(slope), float(intercept), int(data.shape[0]), ex, rem)


def dilation_energy(op: RadialOperator, u: Field1D, t: float) -> DilationParts:
    """
    Energy pieces of x -> u(x/t) from those of u.

    The gradient part scales by t^(N-2), the potential part by t^(N-alpha)
    and int F by t^N.
    """
    if not t > 0:
        raise ParameterError("Dilation factor must be positive")
    N, alpha = op.params.N, op.params.alpha
    f = op.functional
    return DilationParts(
        t=t,
        grad=t ** (N - 2) * f.stiffness_form(u.values),
        potential=t ** (N - alpha) * f.potential_form(u.values),
        F=t ** N * f.integral_F(u.values),
    )


def report_row(A: float, report: Optional[SolveReport], error: str = "") -> dict:
    if report is None:
        return {"A": A, "level": math.nan, "iterations": 0, "residual": math.nan,
                "min_value": math.nan, "error": error}
    return {
        "A": A,
        "level": report.level,
        "iterations": report.iterations,
        "residual": report.residual,
        "min_value": report.min_value,
        "error": error,
    }


def profile_rows(u: Field1D) -> List[dict]:
    """(r, u) rows of a radial profile, closed by the Dirichlet node."""
    rows = [{"r": float(r), "u": float(v)} for r, v in zip(u.grid.free_nodes, u.values)]
    rows.append({"r": u.grid.r_max, "u": 0.0})
    return rows
