"""
Nehari-manifold descent shared by the radial and cylindrical solvers.

A DiscreteFunctional holds the assembled quadratic form
    ||u||_A^2 = u^T (S + diag(P)) u
(S the weighted stiffness, P the weighted potential A|x|^-alpha) together
with the lumped measure weights used for int F(u). The discrete energy is

    I(u) = 1/2 ||u||_A^2 - sum_i w_i F(u_i)

and its Riesz gradient in the A-inner product is u - L^-1 (w * f(u)).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import LinearSolveError, MaxIterationsError, NoSignChangeError, ParameterError
from .nonlinearity import NonlinearitySpec

logger = logging.getLogger(__name__)

# Sufficient-decrease constant of the backtracking line search.
ARMIJO_C = 1e-4

# Relative slack on energy comparisons; below this the energy is roundoff.
ENERGY_RTOL = 1e-13

BISECTION_MAX = 200


@dataclass(frozen=True)
class Tolerances:
    """Stopping rules for the descent and the Nehari projection."""

    residual: float = 1e-6
    max_iter: int = 2000
    nehari_rtol: float = 1e-13
    t_max: float = 1e8
    step_max: float = 1.0
    step_min: float = 1e-12
    log_every: int = 50

    def __post_init__(self):
        if not (self.residual > 0 and self.nehari_rtol > 0):
            raise ParameterError("Tolerances must be positive")
        if self.max_iter < 0:
            raise ParameterError("max_iter must be nonnegative")
        if not (0 < self.step_min <= self.step_max):
            raise ParameterError("Step bounds must satisfy 0 < step_min <= step_max")


@dataclass(frozen=True)
class SolveReport:
    """
    Outcome of one ground-state solve.

    Attributes:
        level: I(u) at the returned field
        iterations: Accepted descent steps
        residual: ||grad I(u)||_A / ||u||_A
        nehari_t: Last Nehari projection scalar
        min_value: Minimum of the returned field
        converged: Whether the residual met the tolerance
        init: Provenance of the initial guess
        deviation: Distance from the radial subspace (cylindrical solves only)
    """

    level: float
    iterations: int
    residual: float
    nehari_t: float
    min_value: float
    converged: bool
    init: str = "user"
    deviation: Optional[float] = None

    def with_deviation(self, deviation: float) -> "SolveReport":
        return replace(self, deviation=deviation)

    def as_row(self) -> dict:
        return {
            "level": self.level,
            "iterations": self.iterations,
            "residual": self.residual,
            "nehari_t": self.nehari_t,
            "min_value": self.min_value,
            "converged": self.converged,
            "init": self.init,
        }


class DiscreteFunctional:
    """
    Energy, gradient and Nehari projection for an assembled discretization.

    Args:
        stiffness: Symmetric positive semidefinite weighted Dirichlet form
        potential: Diagonal of the potential form (already multiplied by A)
        weights: Lumped measure weights for int F(u)
        nonlinearity: f and F
    """

    def __init__(self, stiffness: sp.spmatrix, potential: np.ndarray,
                 weights: np.ndarray, nonlinearity: NonlinearitySpec):
        n = weights.size
        if stiffness.shape != (n, n) or potential.shape != (n,):
            raise ParameterError("Operator blocks have incompatible sizes")
        if not np.all(np.isfinite(potential)):
            raise ParameterError("Potential weights overflow on this grid")

        self.stiffness = sp.csc_matrix(stiffness)
        self.potential = potential
        self.weights = weights
        self.nonlinearity = nonlinearity
        self.matrix = sp.csc_matrix(self.stiffness + sp.diags(potential))

        try:
            self._lu = splu(self.matrix)
        except RuntimeError as exc:
            raise LinearSolveError("Factorization of the A-metric failed", exc)

    @property
    def size(self) -> int:
        return self.weights.size

    # Quadratic form

    def form(self, u: np.ndarray) -> float:
        """||u||_A^2."""
        return float(u @ (self.matrix @ u))

    def stiffness_form(self, u: np.ndarray) -> float:
        return float(u @ (self.stiffness @ u))

    def potential_form(self, u: np.ndarray) -> float:
        return float(np.dot(self.potential, u * u))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """(u, v)_A."""
        return float(u @ (self.matrix @ v))

    def solve(self, b: np.ndarray) -> np.ndarray:
        """L^-1 b."""
        x = self._lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise LinearSolveError("Back-substitution produced non-finite values")
        return x

    # Functional

    def integral_F(self, u: np.ndarray) -> float:
        return float(np.dot(self.weights, self.nonlinearity.F(u)))

    def load(self, u: np.ndarray) -> np.ndarray:
        """Load vector w * f(u)."""
        return self.weights * self.nonlinearity.f(u)

    def energy(self, u: np.ndarray) -> float:
        return 0.5 * self.form(u) - self.integral_F(u)

    def euclidean_gradient(self, u: np.ndarray) -> np.ndarray:
        """Coefficients of I'(u) in the nodal basis: L u - w f(u)."""
        return self.matrix @ u - self.load(u)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Riesz representative of I'(u) in the A-inner product."""
        return u - self.solve(self.load(u))

    # Nehari manifold

    def nehari_slope(self, u: np.ndarray, t: float, norm2: Optional[float] = None) -> float:
        """g'(t)/t = ||u||_A^2 - sum w f(tu) u / t; nonincreasing in t."""
        if norm2 is None:
            norm2 = self.form(u)
        return norm2 - float(np.dot(self.weights, self.nonlinearity.f(t * u) * u)) / t

    def meets_nehari(self, u: np.ndarray, tol: Tolerances = Tolerances()) -> bool:
        """Whether nehari_project(u) finds a root below tol.t_max."""
        norm2 = self.form(u)
        if not norm2 > 0:
            return False
        top = max(1.0, 2.0 ** math.floor(math.log2(tol.t_max)))
        return self.nehari_slope(u, top, norm2) <= 0

    def nehari_project(self, u: np.ndarray, tol: Tolerances = Tolerances()) -> float:
        """
        Smallest t > 0 with I'(tu)u = 0.

        The bracket is grown by doubling from t = 1 and then bisected on the
        predicate g'(t) > 0, which converges to the left end of any plateau
        of zeros.

        Raises:
            ParameterError: If ||u||_A = 0
            NoSignChangeError: If g' stays positive up to tol.t_max
        """
        norm2 = self.form(u)
        if not norm2 > 0:
            raise ParameterError("Nehari projection needs a field with positive norm")

        lo, hi = 0.0, 1.0
        while self.nehari_slope(u, hi, norm2) > 0:
            lo, hi = hi, 2.0 * hi
            if hi > tol.t_max:
                raise NoSignChangeError((0.0, tol.t_max))

        for _ in range(BISECTION_MAX):
            if hi - lo <= tol.nehari_rtol * hi:
                break
            mid = 0.5 * (lo + hi)
            if self.nehari_slope(u, mid, norm2) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def residual(self, u: np.ndarray, g: Optional[np.ndarray] = None) -> float:
        if g is None:
            g = self.gradient(u)
        return math.sqrt(max(self.form(g), 0.0) / self.form(u))

    # Descent

    def descend(self, init: np.ndarray, tol: Tolerances = Tolerances(), provenance: str = "user",
                wrap: Callable[[np.ndarray], object] = lambda x: x) -> Tuple[np.ndarray, SolveReport]:
        """
        Minimize I on the Nehari manifold of nonnegative fields.

        Each step is u <- t*(v) v with v = max(u - tau * grad I(u), 0), the
        step tau found by backtracking from min(2 tau_prev, step_max).

        Args:
            init: Nonzero nonnegative starting field
            tol: Stopping rules
            provenance: Label recorded in the report
            wrap: Converts a flat vector to the caller's field type for errors

        Returns:
            tuple: (field, SolveReport)

        Raises:
            NoSignChangeError: If the initial field has no Nehari point
            MaxIterationsError: If the residual is not reached; carries the
                best iterate and its report
        """
        u = np.maximum(np.asarray(init, dtype=float), 0.0)
        if not np.any(u > 0):
            raise ParameterError("Initial field must be nonzero and nonnegative")

        t = self.nehari_project(u, tol)
        u = t * u
        level = self.energy(u)
        tau = tol.step_max
        iterations = 0

        def _report(res: float, converged: bool) -> SolveReport:
            return SolveReport(level=level, iterations=iterations, residual=res, nehari_t=t,
                               min_value=float(u.min()), converged=converged, init=provenance)

        while True:
            g = self.gradient(u)
            res = self.residual(u, g)

            if res <= tol.residual:
                report = _report(res, True)
                logger.info("descent (%s) converged after %d iterations, level %.10g",
                            provenance, iterations, level)
                return u, report

            if iterations >= tol.max_iter:
                report = _report(res, False)
                raise MaxIterationsError(
                    f"descent ({provenance}) stopped at residual {res:.3e} after {iterations} iterations",
                    wrap(u), report)

            decrease = self.form(g)
            tau = min(2.0 * tau, tol.step_max)
            accepted = False
            while tau >= tol.step_min:
                trial = np.maximum(u - tau * g, 0.0)
                if np.any(trial > 0):
                    try:
                        t_trial = self.nehari_project(trial, tol)
                    except NoSignChangeError:
                        t_trial = None
                    if t_trial is not None:
                        trial = t_trial * trial
                        trial_level = self.energy(trial)
                        slack = ENERGY_RTOL * abs(level)
                        if trial_level <= level - ARMIJO_C * tau * decrease + slack:
                            accepted = True
                            break
                tau *= 0.5

            if not accepted:
                report = _report(res, False)
                raise MaxIterationsError(
                    f"line search ({provenance}) stalled at residual {res:.3e}", wrap(u), report)

            u, t, level = trial, t_trial, trial_level
            iterations += 1
            if tol.log_every and iterations % tol.log_every == 0:
                logger.debug("iteration %d: level %.12g residual %.3e step %.3e",
                             iterations, level, res, tau)
