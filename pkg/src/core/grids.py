"""
Radial and cylindrical grids with their weighted measures.

Both grids truncate the domain to [r_min, R_max] in each coordinate. The
outermost node carries the Dirichlet condition u = 0; the inner end is
left free (the weights s^(K-1), t^(N-K-1), r^(N-1) vanish there). All
weights are exact integrals of the power weights over the cells, so no
pointwise evaluation of |x|^-alpha happens at the origin.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ParameterError
from .problem import sphere_area
from .validation import ParameterValidator, require

# Gauss points per direction for cell averages of the potential on 2D cells.
_CELL_GAUSS = 4


def graded_nodes(r_min: float, r_max: float, n: int, kind: str = "geometric") -> np.ndarray:
    """
    n + 1 nodes from r_min to r_max.

    ``geometric`` clusters nodes at the inner end; ``uniform`` spaces them
    evenly.
    """
    if not (0 < r_min < r_max):
        raise ParameterError("Grid bounds must satisfy 0 < r_min < r_max")
    if n < 2:
        raise ParameterError("A grid needs at least 3 nodes")
    x = np.linspace(0.0, 1.0, n + 1)
    if kind == "geometric":
        return r_min * (r_max / r_min) ** x
    if kind == "uniform":
        return r_min + (r_max - r_min) * x
    raise ParameterError(f"Unknown grid kind: {kind}")


def power_integral(a, b, exponent: float):
    """Elementwise integral of r^exponent over [a, b], 0 < a <= b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if exponent == -1.0:
        return np.log(b / a)
    e1 = exponent + 1.0
    return (b ** e1 - a ** e1) / e1


def dual_cells(nodes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Dual cell bounds of the free nodes (all but the last)."""
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    lo = np.concatenate(([nodes[0]], mids[:-1]))
    return lo, mids


@dataclass(frozen=True)
class RadialGrid:
    """Nodes r_0 < ... < r_n on (0, R_max] for radial functions in R^N."""

    nodes: np.ndarray
    N: int

    def __post_init__(self):
        require(ParameterValidator.validate_nodes(self.nodes))
        require(ParameterValidator.validate_dimension(self.N))

    @classmethod
    def graded(cls, N: int, r_min: float, r_max: float, n: int,
               kind: str = "geometric") -> "RadialGrid":
        return cls(graded_nodes(r_min, r_max, n, kind), N)

    @property
    def size(self) -> int:
        """Number of free nodes."""
        return self.nodes.size - 1

    @property
    def free_nodes(self) -> np.ndarray:
        return self.nodes[:-1]

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def measure_weights(self) -> np.ndarray:
        """sigma_N * int r^(N-1) dr over each dual cell."""
        lo, hi = dual_cells(self.nodes)
        return sphere_area(self.N) * power_integral(lo, hi, self.N - 1.0)

    def potential_weights(self, alpha: float) -> np.ndarray:
        """sigma_N * int r^(N-1-alpha) dr over each dual cell."""
        lo, hi = dual_cells(self.nodes)
        return sphere_area(self.N) * power_integral(lo, hi, self.N - 1.0 - alpha)

    def stiffness_weights(self) -> np.ndarray:
        """sigma_N * int r^(N-1) dr / h^2 for each cell [r_i, r_i+1]."""
        h = np.diff(self.nodes)
        return sphere_area(self.N) * power_integral(self.nodes[:-1], self.nodes[1:], self.N - 1.0) / h ** 2


@dataclass(frozen=True)
class CylGrid:
    """Tensor grid in (s, t) = (|y|, |z|) for the splitting R^K x R^(N-K)."""

    s_nodes: np.ndarray
    t_nodes: np.ndarray
    K: int
    N: int

    def __post_init__(self):
        require(ParameterValidator.validate_nodes(self.s_nodes))
        require(ParameterValidator.validate_nodes(self.t_nodes))
        require(ParameterValidator.validate_dimension(self.N))
        require(ParameterValidator.validate_symmetry_index(self.N, self.K))

    @classmethod
    def graded(cls, N: int, K: int, r_min: float, r_max: float, n: int,
               kind: str = "uniform") -> "CylGrid":
        nodes = graded_nodes(r_min, r_max, n, kind)
        return cls(nodes, nodes.copy(), K, N)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.s_nodes.size - 1, self.t_nodes.size - 1

    @property
    def prefactor(self) -> float:
        return sphere_area(self.K) * sphere_area(self.N - self.K)

    @property
    def s_exponent(self) -> float:
        return self.K - 1.0

    @property
    def t_exponent(self) -> float:
        return self.N - self.K - 1.0

    def transposed(self) -> "CylGrid":
        """Same grid for the splitting R^(N-K) x R^K."""
        return CylGrid(self.t_nodes, self.s_nodes, self.N - self.K, self.N)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinates of the free nodes, each of shape ``shape``."""
        return np.meshgrid(self.s_nodes[:-1], self.t_nodes[:-1], indexing="ij")

    def measure_weights(self) -> np.ndarray:
        slo, shi = dual_cells(self.s_nodes)
        tlo, thi = dual_cells(self.t_nodes)
        ws = power_integral(slo, shi, self.s_exponent)
        wt = power_integral(tlo, thi, self.t_exponent)
        return self.prefactor * np.outer(ws, wt)

    def edge_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Coefficients of the five-point Dirichlet form.

        Returns (ks, kt): ks[i, j] couples (i, j)-(i+1, j), kt[i, j] couples
        (i, j)-(i, j+1); the last index in each direction couples to the
        Dirichlet boundary.
        """
        hs = np.diff(self.s_nodes)
        ht = np.diff(self.t_nodes)
        slo, shi = dual_cells(self.s_nodes)
        tlo, thi = dual_cells(self.t_nodes)
        cell_s = power_integral(self.s_nodes[:-1], self.s_nodes[1:], self.s_exponent) / hs ** 2
        cell_t = power_integral(self.t_nodes[:-1], self.t_nodes[1:], self.t_exponent) / ht ** 2
        dual_s = power_integral(slo, shi, self.s_exponent)
        dual_t = power_integral(tlo, thi, self.t_exponent)
        ks = self.prefactor * np.outer(cell_s, dual_t)
        kt = self.prefactor * np.outer(dual_s, cell_t)
        return ks, kt

    def potential_weights(self, alpha: float) -> np.ndarray:
        """Cell averages of s^(K-1) t^(N-K-1) (s^2+t^2)^(-alpha/2) by tensor Gauss rules."""
        xg, wg = leggauss(_CELL_GAUSS)

        def _points(nodes: np.ndarray, exponent: float):
            lo, hi = dual_cells(nodes)
            half = 0.5 * (hi - lo)[:, None]
            pts = 0.5 * (hi + lo)[:, None] + half * xg[None, :]
            return pts, half * wg[None, :] * pts ** exponent

        sp, sw = _points(self.s_nodes, self.s_exponent)
        tp, tw = _points(self.t_nodes, self.t_exponent)
        rho2 = sp[:, :, None, None] ** 2 + tp[None, None, :, :] ** 2
        vals = sw[:, :, None, None] * tw[None, None, :, :] * rho2 ** (-0.5 * alpha)
        return self.prefactor * vals.sum(axis=(1, 3))


@dataclass
class Field1D:
    """Values of a radial function at the free nodes of a RadialGrid."""

    values: np.ndarray
    grid: RadialGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise ParameterError("Field length does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("Field values must be finite")

    def scaled(self, c: float) -> "Field1D":
        return Field1D(c * self.values, self.grid)


@dataclass
class Field2D:
    """Values of a K-symmetric function at the free nodes of a CylGrid."""

    values: np.ndarray
    grid: CylGrid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ParameterError("Field shape does not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("Field values must be finite")

    def scaled(self, c: float) -> "Field2D":
        return Field2D(c * self.values, self.grid)

    def transposed(self) -> "Field2D":
        return Field2D(self.values.T.copy(), self.grid.transposed())
