"""
Ground states in the class of functions u(|y|, |z|), (y, z) in R^K x R^(N-K).

The reduced energy lives on the quadrant (s, t) = (|y|, |z|) with weight
sigma_K sigma_(N-K) s^(K-1) t^(N-K-1). It is discretized by a five-point
scheme on a tensor grid whose edge and cell weights are exact integrals
of the power weights; the potential uses cell-averaged (s^2+t^2)^(-alpha/2).
Symmetry breaking is detected by comparing the level of this class with
the radial level and by the distance of the minimizer from radial fields.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RegularGridInterpolator

from .descent import DiscreteFunctional, SolveReport, Tolerances
from .errors import NoSignChangeError, ParameterError, QuadratureError, SuiteError
from .grids import CylGrid, Field1D, Field2D, RadialGrid, dual_cells, graded_nodes
from .problem import ProblemParams
from .radial_solver import solve_radial
from .testfn import BumpSpec, dilation_factor, eval_vA, gauss_rule, integrals, sector_weight, shrunk_sector
from .validation import ParameterValidator, require

logger = logging.getLogger(__name__)

BREAK_THRESHOLD = 0.1

BREAK_COLUMNS = ["A", "K", "m_A", "m_A_grid", "c_AK", "deviation", "broken", "margin", "threshold", "error"]

# Angular Gauss points used to average a field over the quarter circle.
ANGULAR_ORDER = 64

# Gauss points per panel, and the panel cap per direction, for cell projections of v_A.
PROJECT_GAUSS = 4
PROJECT_PANELS_MIN = 8
PROJECT_PANELS_MAX = 256


@dataclass
class CylOperator:
    """Assembled discretization of the K-symmetric energy."""

    params: ProblemParams
    grid: CylGrid
    functional: DiscreteFunctional

    def field(self, values: np.ndarray) -> Field2D:
        return Field2D(np.reshape(values, self.grid.shape), self.grid)

    def norm2(self, u: Field2D) -> float:
        return self.functional.form(u.values.ravel())

    def energy(self, u: Field2D) -> float:
        return self.functional.energy(u.values.ravel())

    def gradient(self, u: Field2D) -> Field2D:
        return self.field(self.functional.gradient(u.values.ravel()))

    def nehari_project(self, u: Field2D, tol: Tolerances = Tolerances()) -> float:
        return self.functional.nehari_project(u.values.ravel(), tol)


@dataclass(frozen=True)
class BreakReport:
    """
    One point of the symmetry-breaking sweep.

    m_A is the radial level on the 1D grid and m_A_grid the radial level on
    the 2D grid of c_AK. broken holds iff c_AK < m_A_grid and
    deviation > threshold; margin is m_A_grid - c_AK. A failed point keeps
    its error text and NaN levels. fields, when kept, holds the radial
    ground state and the lowest K-symmetric field.
    """

    A: float
    K: int
    m_A: float
    c_AK: float
    deviation: float
    broken: bool
    margin: float
    m_A_grid: float = math.nan
    threshold: float = BREAK_THRESHOLD
    error: str = ""
    fields: Optional[Tuple[Field1D, Field2D]] = field(default=None, compare=False, repr=False)

    @classmethod
    def failed(cls, A: float, K: int, threshold: float, error: str,
               m_A: float = math.nan) -> "BreakReport":
        return cls(A, K, m_A, math.nan, math.nan, False, math.nan, threshold=threshold, error=error)

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in BREAK_COLUMNS}


@dataclass(frozen=True)
class SweepGrids:
    """Discretization used at each sweep point, in units of the natural length."""

    radial_nodes: int = 2000
    radial_r_min: float = 1e-4
    radial_r_max: float = 60.0
    cyl_nodes: int = 256
    cyl_r_min: float = 1e-3
    cyl_r_max: float = 20.0
    cyl_kind: str = "geometric"


def stiffness_matrix(grid: CylGrid) -> sp.csc_matrix:
    """Five-point weighted Dirichlet form on the free nodes, row-major in (s, t)."""
    ks, kt = grid.edge_weights()
    ns, nt = grid.shape
    idx = np.arange(ns * nt).reshape(ns, nt)

    diag = ks + kt
    diag[1:, :] += ks[:-1, :]
    diag[:, 1:] += kt[:, :-1]

    # interior edges; the last edge in each direction only feeds the diagonal
    rows = [idx.ravel(), idx[:-1, :].ravel(), idx[:, :-1].ravel()]
    cols = [idx.ravel(), idx[1:, :].ravel(), idx[:, 1:].ravel()]
    vals = [diag.ravel(), -ks[:-1, :].ravel(), -kt[:, :-1].ravel()]
    upper = sp.coo_matrix((np.concatenate(vals[1:]), (np.concatenate(rows[1:]), np.concatenate(cols[1:]))),
                          shape=(ns * nt, ns * nt))
    return sp.csc_matrix(sp.diags(vals[0]) + upper + upper.T)


def assemble_cyl(params: ProblemParams, grid: CylGrid) -> CylOperator:
    """
    Assemble the K-symmetric quadratic form and energy.

    Raises:
        ParameterError: If K is outside [2, N-2], the grid dimension
            mismatches, or the potential overflows at the first nodes
    """
    if grid.N != params.N:
        raise ParameterError(f"Grid dimension {grid.N} differs from problem dimension {params.N}")
    corner = np.hypot(grid.s_nodes[0], grid.t_nodes[0])
    with np.errstate(over="ignore"):
        peak = params.A * corner ** (-params.alpha)
    if not math.isfinite(peak):
        raise ParameterError(f"A |x|^-alpha overflows at |x| = {corner:.3e}")

    potential = params.A * grid.potential_weights(params.alpha).ravel()
    functional = DiscreteFunctional(stiffness_matrix(grid), potential,
                                    grid.measure_weights().ravel(), params.nonlinearity)
    logger.debug("assembled cylindrical operator: N=%d K=%d A=%g shape=%s",
                 params.N, grid.K, params.A, grid.shape)
    return CylOperator(params, grid, functional)


def ground_state_cyl(op: CylOperator, init: Field2D, tol: Tolerances = Tolerances(),
                     provenance: str = "user") -> Tuple[Field2D, SolveReport]:
    """
    Ground state of the K-symmetric class by Nehari descent.

    The returned report carries the symmetry deviation of the minimizer.

    Raises:
        NoSignChangeError: If init has no point on the Nehari manifold
        MaxIterationsError: With the best iterate as a Field2D
    """
    if init.values.shape != op.grid.shape:
        raise ParameterError("Initial field lives on a different grid")
    values, report = op.functional.descend(init.values.ravel(), tol, provenance, wrap=op.field)
    u = op.field(values)
    return u, report.with_deviation(symmetry_deviation(op, u))


def embed(profile: Field1D, grid: CylGrid) -> Field2D:
    """Radial profile v evaluated at rho = sqrt(s^2 + t^2); zero beyond its last node."""
    S, T = grid.mesh()
    rho = np.hypot(S, T)
    nodes = profile.grid.nodes
    values = np.concatenate((profile.values, [0.0]))
    out = np.interp(rho, nodes, values, left=values[0], right=0.0)
    return Field2D(out, grid)


def radialize(u: Field2D) -> Field1D:
    """
    Average of u over the quarter circle of radius rho with weight H(theta).

    The profile lives on a radial grid whose nodes are the grid's s-nodes
    (up to the largest radius covered by the quadrant).
    """
    grid = u.grid
    nodes = grid.s_nodes[grid.s_nodes <= min(grid.s_nodes[-1], grid.t_nodes[-1])]
    if nodes.size < 3:
        raise ParameterError("Grid too small to radialize")
    radial = RadialGrid(nodes, grid.N)

    s_all = grid.s_nodes
    t_all = grid.t_nodes
    padded = np.zeros((s_all.size, t_all.size))
    padded[:-1, :-1] = u.values
    interp = RegularGridInterpolator((s_all, t_all), padded, bounds_error=False, fill_value=None)

    xg, wg = leggauss(ANGULAR_ORDER)
    theta = 0.25 * math.pi * (xg + 1.0)
    H = sector_weight(theta, grid.K, grid.N) * wg
    rho = radial.free_nodes
    pts_s = np.clip(rho[:, None] * np.cos(theta)[None, :], s_all[0], s_all[-1])
    pts_t = np.clip(rho[:, None] * np.sin(theta)[None, :], t_all[0], t_all[-1])
    vals = interp(np.stack([pts_s.ravel(), pts_t.ravel()], axis=-1)).reshape(pts_s.shape)
    return Field1D(vals @ H / H.sum(), radial)


def symmetry_deviation(op: CylOperator, u: Field2D) -> float:
    """||u - embed(radialize(u))||_A / ||u||_A."""
    norm2 = op.norm2(u)
    if not norm2 > 0:
        raise ParameterError("Symmetry deviation of the zero field is undefined")
    rad = embed(radialize(u), op.grid)
    diff = u.values - rad.values
    return math.sqrt(op.functional.form(diff.ravel()) / norm2)


def sample_vA(spec: BumpSpec, A: float, grid: CylGrid, lam: float = 1.0) -> Field2D:
    """v_A(x/lam) at the free nodes."""
    S, T = grid.mesh()
    return Field2D(eval_vA(spec, A, grid.K, grid.N, S / lam, T / lam), grid)


def _cell_index(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index of the dual cell holding x; points inside r_min go to cell 0."""
    lo, hi = dual_cells(nodes)
    edges = np.append(lo, hi[-1])
    return np.maximum(np.searchsorted(edges, x, side="right") - 1, 0)


def _panels(length: float, h: float) -> int:
    return int(min(PROJECT_PANELS_MAX, max(PROJECT_PANELS_MIN, math.ceil(length / h) + 1)))


def project_vA(spec: BumpSpec, A: float, grid: CylGrid, lam: float = 1.0) -> Field2D:
    """
    Dual-cell averages of v_A(x/lam).

    Composite Gauss points over the lifted sector are binned into the dual
    cells, so sum_i w_i u_i = int v_A(x/lam) dx up to quadrature error and
    a sector narrower than the mesh still leaves a nonzero field.
    """
    rho_lo, rho_hi, th_lo, th_hi = shrunk_sector(A)
    r0, r1 = lam * rho_lo, lam * rho_hi
    r_mid, th_mid = 0.5 * (r0 + r1), 0.5 * (th_lo + th_hi)
    h_s = float(np.interp(r_mid * math.cos(th_mid), grid.s_nodes[:-1], np.diff(grid.s_nodes)))
    h_t = float(np.interp(r_mid * math.sin(th_mid), grid.t_nodes[:-1], np.diff(grid.t_nodes)))
    h = min(h_s, h_t)

    rho, w_rho = gauss_rule(r0, r1, PROJECT_GAUSS, _panels(r1 - r0, h))
    theta, w_th = gauss_rule(th_lo, th_hi, PROJECT_GAUSS, _panels(r1 * (th_hi - th_lo), h))
    R, TH = np.meshgrid(rho, theta, indexing="ij")
    S, T = R * np.cos(TH), R * np.sin(TH)
    mass = (eval_vA(spec, A, grid.K, grid.N, S / lam, T / lam) * grid.prefactor
            * S ** grid.s_exponent * T ** grid.t_exponent * R * np.outer(w_rho, w_th))

    i, j = _cell_index(grid.s_nodes, S), _cell_index(grid.t_nodes, T)
    ns, nt = grid.shape
    inside = (i < ns) & (j < nt)
    acc = np.zeros(grid.shape)
    np.add.at(acc, (i[inside], j[inside]), mass[inside])
    return Field2D(acc / grid.measure_weights(), grid)


def bump_start(op: CylOperator, spec: BumpSpec, lam: float,
               tol: Tolerances = Tolerances()) -> Field2D:
    """
    Projected v_A(x/lam), with lam doubled until its ray meets the Nehari manifold.

    Raises:
        NoSignChangeError: If the sector leaves the grid before that happens
    """
    A = op.params.A
    rho_hi = shrunk_sector(A)[1]
    outer = min(op.grid.s_nodes[-1], op.grid.t_nodes[-1])
    while True:
        u = project_vA(spec, A, op.grid, lam)
        if op.functional.meets_nehari(u.values.ravel(), tol):
            return u
        if 2.0 * lam * rho_hi > 0.5 * outer:
            raise NoSignChangeError((0.0, tol.t_max))
        lam *= 2.0
        logger.debug("test-function start dilated to lam=%.4g at A=%g", lam, A)


def cyl_grid_for(params: ProblemParams, K: int, grids: SweepGrids, extent: float = 0.0) -> CylGrid:
    """Grid in units of the natural length, stretched to cover a given radius."""
    ell = params.natural_length
    r_max = max(grids.cyl_r_max * ell, 4.0 * extent)
    nodes = graded_nodes(grids.cyl_r_min * min(ell, 1.0), r_max, grids.cyl_nodes, grids.cyl_kind)
    return CylGrid(nodes, nodes.copy(), K, params.N)


@dataclass
class CylDescents:
    """
    K-symmetric descents at one coupling, all on one grid.

    embedded_level is I at the Nehari projection of the embedded radial
    ground state; failures holds one message per start that did not
    converge.
    """

    op: CylOperator
    runs: List[Tuple[str, Field2D, SolveReport]]
    embedded_level: float
    failures: List[str]

    def lowest(self):
        return lowest_descent(self.runs)

    def radial_reference(self, threshold: float = BREAK_THRESHOLD) -> float:
        """
        Radial level on this grid.

        The descent from the embedded radial state while it stays within
        threshold of radial fields; the projected embedding otherwise.
        """
        for label, _, report in self.runs:
            if label == "radial" and report.deviation is not None and report.deviation <= threshold:
                return min(report.level, self.embedded_level)
        return self.embedded_level


def cyl_descents(params: ProblemParams, K: int, radial_u: Field1D, grids: SweepGrids = SweepGrids(),
                 tol: Tolerances = Tolerances()) -> CylDescents:
    """
    K-symmetric descents from the dilated test function and the embedded radial state.

    The grid is stretched to cover the dilation radius of the test function.
    Starts whose construction or descent fails are logged and recorded.

    Raises:
        NoSignChangeError: If the embedded radial state has no Nehari point
            on the 2D grid
    """
    spec = BumpSpec.for_nonlinearity(params.nonlinearity)
    failures = []
    try:
        ints = integrals(spec, params.A, K, params.N, params.alpha, params.nonlinearity)
        lam = dilation_factor(params.alpha, ints.ratio) if ints.ratio > 1 else 1.0
    except QuadratureError as exc:
        failures.append(f"test_function: {exc}")
        lam = None

    grid = cyl_grid_for(params, K, grids, extent=lam or 0.0)
    op = assemble_cyl(params, grid)
    embedded = embed(radial_u, grid)
    embedded_level = op.energy(embedded.scaled(op.nehari_project(embedded, tol)))

    starts = [("radial", lambda: embedded)]
    if lam is not None:
        starts.insert(0, ("test_function", lambda: bump_start(op, spec, lam, tol)))

    runs = []
    for label, build in starts:
        try:
            u, report = ground_state_cyl(op, build(), tol, label)
        except SuiteError as exc:
            logger.warning("cylindrical descent from %s init failed at A=%g: %s", label, params.A, exc)
            failures.append(f"{label}: {exc}")
            continue
        runs.append((label, u, report))
    return CylDescents(op, runs, embedded_level, failures)


def lowest_descent(results: Sequence[Tuple[str, Field2D, SolveReport]]):
    """The (label, field, report) with the least level, or None."""
    return min(results, key=lambda item: item[2].level, default=None)


def break_point(params: ProblemParams, K: int, grids: SweepGrids = SweepGrids(),
                tol: Tolerances = Tolerances(), threshold: float = BREAK_THRESHOLD,
                keep_fields: bool = False) -> BreakReport:
    """
    Radial and K-symmetric levels at one coupling and the breaking verdict.

    c_AK is compared with the radial level on the same 2D grid, so the
    discretization bias between the 1D and 2D grids does not enter the
    verdict; the 1D level is reported as m_A. Any suite error is recorded
    in the report.
    """
    A = params.A
    try:
        radial_u, radial_report = solve_radial(params, grids.radial_nodes, grids.radial_r_min,
                                               grids.radial_r_max, 1.0, tol)
        descents = cyl_descents(params, K, radial_u, grids, tol)
    except SuiteError as exc:
        logger.warning("sweep point A=%g failed: %s", A, exc)
        return BreakReport.failed(A, K, threshold, str(exc))

    best = descents.lowest()
    if best is None:
        return BreakReport.failed(A, K, threshold, "no cylindrical descent converged: "
                                  + "; ".join(descents.failures), m_A=radial_report.level)

    m_A, m_grid = radial_report.level, descents.radial_reference(threshold)
    c_AK, deviation = best[2].level, best[2].deviation
    broken = bool(c_AK < m_grid and deviation > threshold)
    logger.info("A=%g K=%d: m_A=%.8g (grid %.8g) c_AK=%.8g deviation=%.3f broken=%s",
                A, K, m_A, m_grid, c_AK, deviation, broken)
    return BreakReport(A, K, m_A, c_AK, deviation, broken, m_grid - c_AK, m_A_grid=m_grid,
                       threshold=threshold, fields=(radial_u, best[1]) if keep_fields else None)


def _break_task(args) -> BreakReport:
    return break_point(*args)


def break_sweep(params: ProblemParams, K: int, A_list: Sequence[float],
                grids: SweepGrids = SweepGrids(), tol: Tolerances = Tolerances(),
                workers: int = 1, threshold: float = BREAK_THRESHOLD,
                keep_fields: bool = False) -> List[BreakReport]:
    """
    Break reports for every A, in the order of A_list.

    Points are independent and run in a process pool when workers > 1;
    a failing point is recorded and the sweep continues.
    """
    require(ParameterValidator.validate_symmetry_index(params.N, K))
    A_values = [float(a) for a in A_list]
    if any(a <= 0 for a in A_values):
        raise ParameterError("A values must be positive")
    if any(b <= a for a, b in zip(A_values, A_values[1:])):
        raise ParameterError("A values must be strictly increasing")

    tasks = [(params.with_coupling(A), K, grids, tol, threshold, keep_fields) for A in A_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_break_task, tasks))
    return [_break_task(task) for task in tasks]


def empirical_threshold(reports: Sequence[BreakReport]) -> float:
    """Least A with broken = true; math.inf if none."""
    return min((r.A for r in reports if r.broken), default=math.inf)


def field_rows(u: Field2D) -> List[dict]:
    """Flat (s, t, u) rows of a field for plotting."""
    S, T = u.grid.mesh()
    return [{"s": float(s), "t": float(t), "u": float(v)}
            for s, t, v in zip(S.ravel(), T.ravel(), u.values.ravel())]
