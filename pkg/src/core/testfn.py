"""
Angularly localized test functions for the K-symmetric class.

A smooth bump psi on E = (1/4, 3/4) x (pi/6, pi/3) is pulled back to the
shrunk sector

    E_A = {((1/4)^(1/sqrt A) < rho < (3/4)^(1/sqrt A), pi/(6 sqrt A) < theta < pi/(3 sqrt A))}

through (r, phi) = (rho^sqrt(A), theta sqrt(A)) and lifted to R^N by
v_A(y, z) = psi_A(|(y, z)|, angle of (|y|, |z|)). The Dirichlet, potential
and F integrals of v_A are computed both over E_A directly and over the
fixed domain E after the change of variables; the two must agree.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ParameterError, QuadratureError
from .exponents import cylindrical_bound_exponent
from .nonlinearity import NonlinearitySpec
from .problem import sphere_area
from .validation import ParameterValidator, require

logger = logging.getLogger(__name__)

R_LO, R_HI = 0.25, 0.75
PHI_LO, PHI_HI = math.pi / 6, math.pi / 3

DEFAULT_ORDER = 64
DEFAULT_PANELS = 4

TESTFN_COLUMNS = ["A", "grad2", "pot2", "Fint", "ratio", "lambda", "energy", "bound", "discrepancy"]


def _beta(x):
    """exp(-1/(x(1-x))) on (0, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    safe = np.where(inside, x, 0.5)
    return np.where(inside, np.exp(-1.0 / (safe * (1.0 - safe))), 0.0)


def _beta_prime(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    safe = np.where(inside, x, 0.5)
    q = safe * (1.0 - safe)
    return np.where(inside, np.exp(-1.0 / q) * (1.0 - 2.0 * safe) / q ** 2, 0.0)


@dataclass(frozen=True)
class BumpSpec:
    """
    Product bump psi(r, phi) = c beta((r - 1/4)/(1/2)) beta((phi - pi/6)/(pi/6)).

    c is chosen so that max psi = amplitude; amplitude defaults to
    0.9 s_star so that 0 <= psi < s_star.
    """

    s_star: float = 1.0
    amplitude: Optional[float] = None

    def __post_init__(self):
        if not (self.s_star > 0):
            raise ParameterError("s_star must be positive")
        if self.amplitude is None:
            object.__setattr__(self, "amplitude", 0.9 * self.s_star if math.isfinite(self.s_star) else 1.0)
        if not (0 < self.amplitude < self.s_star):
            raise ParameterError("Bump amplitude must lie in (0, s_star)")

    @property
    def scale(self) -> float:
        # beta peaks at exp(-4)
        return self.amplitude * math.exp(8.0)

    def psi(self, r, phi):
        x = (np.asarray(r) - R_LO) / (R_HI - R_LO)
        y = (np.asarray(phi) - PHI_LO) / (PHI_HI - PHI_LO)
        return self.scale * _beta(x) * _beta(y)

    def psi_r(self, r, phi):
        x = (np.asarray(r) - R_LO) / (R_HI - R_LO)
        y = (np.asarray(phi) - PHI_LO) / (PHI_HI - PHI_LO)
        return self.scale * _beta_prime(x) * _beta(y) / (R_HI - R_LO)

    def psi_phi(self, r, phi):
        x = (np.asarray(r) - R_LO) / (R_HI - R_LO)
        y = (np.asarray(phi) - PHI_LO) / (PHI_HI - PHI_LO)
        return self.scale * _beta(x) * _beta_prime(y) / (PHI_HI - PHI_LO)

    @classmethod
    def for_nonlinearity(cls, nonlinearity: NonlinearitySpec) -> "BumpSpec":
        return cls(s_star=nonlinearity.s_star)


@dataclass(frozen=True)
class TestFnIntegrals:
    """
    Integrals of v_A in the transformed form, with the direct-form values.

    pot2 is int v_A^2 |x|^-alpha (A pot2 is the potential term), grad2 is
    int |grad v_A|^2 and Fint is int F(v_A).
    """

    __test__ = False

    A: float
    grad2: float
    pot2: float
    Fint: float
    grad2_direct: float
    pot2_direct: float
    Fint_direct: float

    @property
    def norm2(self) -> float:
        """||v_A||_A^2."""
        return self.grad2 + self.A * self.pot2

    @property
    def ratio(self) -> float:
        return self.norm2 / self.Fint

    @property
    def discrepancy(self) -> float:
        """Largest relative difference between the two evaluations."""
        pairs = ((self.grad2, self.grad2_direct), (self.pot2, self.pot2_direct),
                 (self.Fint, self.Fint_direct))
        return max(abs(a - b) / max(abs(a), abs(b)) for a, b in pairs)


@dataclass(frozen=True)
class ThresholdScan:
    A_values: Tuple[float, ...]
    ratios: Tuple[float, ...]
    A_K: float
    monotone: bool


@dataclass(frozen=True)
class EndpointEstimate:
    """Energy data of u(x) = v_A(x/lam) and the straight-path bound."""

    A: float
    lam: float
    norm2: float
    Fint: float
    energy: float
    bound: float


@dataclass(frozen=True)
class SectorBounds:
    lower: float
    upper: float

    @property
    def spread(self) -> float:
        return self.upper / self.lower


def sector_weight(theta, K: int, N: int):
    """H(theta) = cos^(K-1)(theta) sin^(N-K-1)(theta)."""
    theta = np.asarray(theta, dtype=float)
    return np.cos(theta) ** (K - 1) * np.sin(theta) ** (N - K - 1)


def gauss_rule(a: float, b: float, order: int = DEFAULT_ORDER,
               panels: int = DEFAULT_PANELS) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    if order < 1 or panels < 1:
        raise ParameterError("Quadrature order and panel count must be positive")
    xg, wg = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def shrunk_sector(A: float) -> Tuple[float, float, float, float]:
    """(rho_lo, rho_hi, theta_lo, theta_hi) of E_A."""
    root = math.sqrt(A)
    return R_LO ** (1.0 / root), R_HI ** (1.0 / root), PHI_LO / root, PHI_HI / root


def _check(A: float, K: int, N: int) -> None:
    require(ParameterValidator.validate_dimension(N))
    require(ParameterValidator.validate_symmetry_index(N, K))
    if not (A > 0 and math.isfinite(A)):
        raise ParameterError("A must be a positive finite number")


def eval_vA(spec: BumpSpec, A: float, K: int, N: int, s, t):
    """
    v_A at (s, t) = (|y|, |z|) in the closed quadrant.

    Zero at the origin and outside the lift of E_A; accepts arrays.
    """
    _check(A, K, N)
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    rho = np.hypot(s_arr, t_arr)
    theta = np.arctan2(t_arr, s_arr)
    root = math.sqrt(A)
    with np.errstate(divide="ignore"):
        r = np.where(rho > 0, rho, 0.0) ** root
    out = np.where(rho > 0, spec.psi(r, theta * root), 0.0)
    return float(out) if out.ndim == 0 else out


def _transformed(spec: BumpSpec, A: float, K: int, N: int, alpha: float,
                 nonlinearity: NonlinearitySpec, order: int, panels: int,
                 scale: float = 1.0) -> Tuple[float, float, float]:
    """(grad2, pot2, int F(scale v_A)) over the fixed domain E."""
    root = math.sqrt(A)
    r, wr = gauss_rule(R_LO, R_HI, order, panels)
    phi, wp = gauss_rule(PHI_LO, PHI_HI, order, panels)
    R, P = np.meshgrid(r, phi, indexing="ij")
    W = np.outer(wr, wp) * sector_weight(P / root, K, N)
    pre = sphere_area(K) * sphere_area(N - K)

    psi = spec.psi(R, P)
    psi_r = spec.psi_r(R, P)
    psi_p = spec.psi_phi(R, P)

    grad2 = pre * np.sum(W * (psi_r ** 2 + psi_p ** 2 / R ** 2) * R ** ((N - 2) / root + 1.0))
    pot2 = pre / A * np.sum(W * psi ** 2 * R ** ((N - alpha) / root - 1.0))
    Fint = pre / A * np.sum(W * nonlinearity.F(scale * psi) * R ** (N / root - 1.0))
    return float(grad2), float(pot2), float(Fint)


def _direct(spec: BumpSpec, A: float, K: int, N: int, alpha: float,
            nonlinearity: NonlinearitySpec, order: int, panels: int) -> Tuple[float, float, float]:
    """(grad2, pot2, int F(v_A)) in polar coordinates over E_A."""
    root = math.sqrt(A)
    rho_lo, rho_hi, th_lo, th_hi = shrunk_sector(A)
    rho, wr = gauss_rule(rho_lo, rho_hi, order, panels)
    theta, wt = gauss_rule(th_lo, th_hi, order, panels)
    RHO, TH = np.meshgrid(rho, theta, indexing="ij")
    W = np.outer(wr, wt) * sector_weight(TH, K, N)
    pre = sphere_area(K) * sphere_area(N - K)

    r = RHO ** root
    phi = TH * root
    v = spec.psi(r, phi)
    v_rho = spec.psi_r(r, phi) * root * r / RHO
    v_th = spec.psi_phi(r, phi) * root

    grad2 = pre * np.sum(W * (v_rho ** 2 + v_th ** 2 / RHO ** 2) * RHO ** (N - 1))
    pot2 = pre * np.sum(W * v ** 2 * RHO ** (N - 1 - alpha))
    Fint = pre * np.sum(W * nonlinearity.F(v) * RHO ** (N - 1))
    return float(grad2), float(pot2), float(Fint)


def integrals(spec: BumpSpec, A: float, K: int, N: int, alpha: float,
              nonlinearity: NonlinearitySpec, order: int = DEFAULT_ORDER,
              panels: int = DEFAULT_PANELS, rtol: Optional[float] = None) -> TestFnIntegrals:
    """
    Dirichlet, potential and F integrals of v_A, each evaluated twice.

    Args:
        rtol: If given, the largest relative disagreement allowed between
            the direct and transformed evaluations

    Raises:
        QuadratureError: If the disagreement exceeds rtol or Fint vanishes
    """
    _check(A, K, N)
    grad2, pot2, Fint = _transformed(spec, A, K, N, alpha, nonlinearity, order, panels)
    direct = _direct(spec, A, K, N, alpha, nonlinearity, order, panels)
    if not Fint > 0:
        raise QuadratureError("int F(v_A) evaluated to a nonpositive value", Fint)

    result = TestFnIntegrals(A, grad2, pot2, Fint, *direct)
    if rtol is not None and result.discrepancy > rtol:
        raise QuadratureError(f"change of variables check failed at A={A:g}", result.discrepancy)
    logger.debug("test function integrals at A=%g: ratio %.6g discrepancy %.2e",
                 A, result.ratio, result.discrepancy)
    return result


def scan_threshold(spec: BumpSpec, K: int, N: int, alpha: float, nonlinearity: NonlinearitySpec,
                   A_sweep: Sequence[float], order: int = DEFAULT_ORDER,
                   panels: int = DEFAULT_PANELS) -> ThresholdScan:
    """Ratios ||v_A||_A^2 / int F(v_A) along the sweep and the first A above 1."""
    A_values = tuple(float(a) for a in A_sweep)
    if any(b <= a for a, b in zip(A_values, A_values[1:])):
        raise ParameterError("A sweep must be strictly increasing")

    ratios = tuple(integrals(spec, A, K, N, alpha, nonlinearity, order, panels).ratio for A in A_values)
    A_K = next((A for A, q in zip(A_values, ratios) if q > 1.0), math.inf)
    monotone = all(b >= a for a, b in zip(ratios, ratios[1:]))
    if not monotone:
        logger.warning("ratio is not monotone along the A sweep")
    return ThresholdScan(A_values, ratios, A_K, monotone)


def threshold_AK(spec: BumpSpec, K: int, N: int, alpha: float, nonlinearity: NonlinearitySpec,
                 A_sweep: Sequence[float], order: int = DEFAULT_ORDER) -> float:
    """Smallest sweep value with ratio > 1; math.inf if there is none."""
    return scan_threshold(spec, K, N, alpha, nonlinearity, A_sweep, order).A_K


def dilation_factor(alpha: float, ratio: float) -> float:
    """lam = ratio^(1/alpha) for alpha < 2, ratio^(1/2) for alpha > 2."""
    if alpha == 2:
        raise ParameterError("alpha = 2 has no endpoint dilation")
    return ratio ** (1.0 / alpha) if alpha < 2 else math.sqrt(ratio)


def endpoint_ubar(spec: BumpSpec, A: float, K: int, N: int, alpha: float,
                  nonlinearity: NonlinearitySpec, A_K: Optional[float] = None,
                  order: int = DEFAULT_ORDER, panels: int = DEFAULT_PANELS) -> EndpointEstimate:
    """
    Endpoint u(x) = v_A(x/lam) of the straight path and its energy bound.

    The pieces of ||u||_A^2 and int F(u) follow from those of v_A by the
    dilation factors lam^(N-2), lam^(N-alpha) and lam^N. The bound is
    m ||u||_A^(2mu/(mu-2)) / (int F(u))^(2/(mu-2)) with
    m = (1/mu)^(2/(mu-2)) (1/2 - 1/mu).

    Raises:
        ParameterError: If A <= A_K or the dilation factor is not above 1
    """
    if A_K is not None and not A > A_K:
        raise ParameterError(f"A = {A:g} must exceed the threshold A_K = {A_K:g}")
    ints = integrals(spec, A, K, N, alpha, nonlinearity, order, panels)
    lam = dilation_factor(alpha, ints.ratio)
    if not lam > 1:
        raise ParameterError(f"dilation factor {lam:.6g} <= 1 at A = {A:g}; A is below the threshold")

    norm2 = lam ** (N - 2) * ints.grad2 + lam ** (N - alpha) * A * ints.pot2
    Fint = lam ** N * ints.Fint
    energy = 0.5 * norm2 - Fint
    mu = nonlinearity.mu
    m = (1.0 / mu) ** (2.0 / (mu - 2.0)) * (0.5 - 1.0 / mu)
    bound = m * norm2 ** (mu / (mu - 2.0)) / Fint ** (2.0 / (mu - 2.0))
    return EndpointEstimate(A, lam, norm2, Fint, energy, bound)


def straight_path_profile(spec: BumpSpec, A: float, K: int, N: int, alpha: float,
                          nonlinearity: NonlinearitySpec, ts: Sequence[float],
                          order: int = DEFAULT_ORDER, panels: int = DEFAULT_PANELS
                          ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    I(t u) along t in [0, 1] for the endpoint u, and its power envelope.

    Returns:
        tuple: (ts, energies, envelope) with envelope
            t^2/2 ||u||_A^2 - t^mu int F(u) >= I(t u)
    """
    end = endpoint_ubar(spec, A, K, N, alpha, nonlinearity, order=order, panels=panels)
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise ParameterError("Path parameters must lie in [0, 1]")
    energies = np.empty_like(ts)
    for i, t in enumerate(ts):
        F_t = _transformed(spec, A, K, N, alpha, nonlinearity, order, panels, scale=t)[2]
        energies[i] = 0.5 * t * t * end.norm2 - end.lam ** N * F_t
    envelope = 0.5 * ts ** 2 * end.norm2 - ts ** nonlinearity.mu * end.Fint
    return ts, energies, envelope


def sector_weight_bounds(K: int, N: int, A: float, samples: int = 2001) -> SectorBounds:
    """
    min and max of H(phi/sqrt A) A^((N-K-1)/2) over phi in [pi/6, pi/3].

    Both stay between fixed positive constants as A grows.
    """
    require(ParameterValidator.validate_symmetry_index(N, K))
    phi = np.linspace(PHI_LO, PHI_HI, samples)
    vals = sector_weight(phi / math.sqrt(A), K, N) * A ** ((N - K - 1) / 2.0)
    return SectorBounds(float(vals.min()), float(vals.max()))


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    if x.size < 2:
        raise ParameterError("Slope fit needs at least two points")
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class TestFnSweep:
    """Per-A rows of the test-function experiment and fitted slopes."""

    __test__ = False

    rows: List[dict]
    A_K: float
    ratio_slope: float
    bound_slope: Optional[float]
    expected_bound_slope: float


def testfn_sweep(spec: BumpSpec, K: int, N: int, alpha: float, nonlinearity: NonlinearitySpec,
                 A_values: Sequence[float], order: int = DEFAULT_ORDER,
                 panels: int = DEFAULT_PANELS) -> TestFnSweep:
    """Integrals, ratio, endpoint and bound for every A in the sweep."""
    scan = scan_threshold(spec, K, N, alpha, nonlinearity, A_values, order, panels)
    rows, above_A, bounds = [], [], []
    for A in scan.A_values:
        ints = integrals(spec, A, K, N, alpha, nonlinearity, order, panels)
        row = {"A": A, "grad2": ints.grad2, "pot2": ints.pot2, "Fint": ints.Fint,
               "ratio": ints.ratio, "lambda": None, "energy": None, "bound": None,
               "discrepancy": ints.discrepancy}
        if A >= scan.A_K:
            end = endpoint_ubar(spec, A, K, N, alpha, nonlinearity, order=order, panels=panels)
            row.update({"lambda": end.lam, "energy": end.energy, "bound": end.bound})
            above_A.append(A)
            bounds.append(end.bound)
        rows.append(row)

    ratio_slope = loglog_slope(scan.A_values, scan.ratios) if len(scan.A_values) > 1 else math.nan
    bound_slope = loglog_slope(above_A, bounds) if len(above_A) > 1 else None
    expected = float(cylindrical_bound_exponent(N, alpha, K))
    logger.info("test function sweep: A_K=%g ratio slope %.4f bound slope %s (expected %.4f)",
                scan.A_K, ratio_slope, bound_slope, expected)
    return TestFnSweep(rows, scan.A_K, ratio_slope, bound_slope, expected)
