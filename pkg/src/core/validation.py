"""
Parameter validation for problem instances.

Every check returns an ``(is_valid, error_message)`` pair; ``require`` turns a
failed check into a ParameterError at the call site.
"""

import math
from numbers import Real
from typing import Sequence, Tuple

import numpy as np

from .errors import ParameterError


def require(check: Tuple[bool, str]) -> None:
    """Raise ParameterError if a validation result is negative."""
    valid, error = check
    if not valid:
        raise ParameterError(error)


class ParameterValidator:
    """Range checks for (N, alpha, A, K, p) and discretization inputs."""

    @staticmethod
    def validate_dimension(N: int, minimum: int = 3) -> Tuple[bool, str]:
        """
        Validate the space dimension.

        Args:
            N: Dimension of the ambient space
            minimum: Smallest admissible dimension

        Returns:
            tuple: (is_valid, error_message)
        """
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
            return False, "Dimension N must be an integer"

        if N < minimum:
            return False, f"Dimension N must be at least {minimum}"

        return True, ""

    @staticmethod
    def validate_alpha(alpha: Real, allow_two: bool = True) -> Tuple[bool, str]:
        """
        Validate the decay/singularity exponent of the potential.

        Args:
            alpha: Exponent in A|x|^-alpha
            allow_two: Whether alpha = 2 is acceptable

        Returns:
            tuple: (is_valid, error_message)
        """
        if not isinstance(alpha, Real) or not math.isfinite(float(alpha)):
            return False, "alpha must be a finite real number"

        if alpha <= 0:
            return False, "alpha must be positive"

        if not allow_two and alpha == 2:
            return False, "alpha = 2 is excluded"

        return True, ""

    @staticmethod
    def validate_coupling(A: Real) -> Tuple[bool, str]:
        """Validate the potential strength A > 0."""
        if not isinstance(A, Real) or not math.isfinite(float(A)):
            return False, "A must be a finite real number"

        if A <= 0:
            return False, "A must be positive"

        return True, ""

    @staticmethod
    def validate_symmetry_index(N: int, K: int) -> Tuple[bool, str]:
        """
        Validate the splitting R^N = R^K x R^(N-K).

        Returns:
            tuple: (is_valid, error_message)
        """
        if isinstance(K, bool) or not isinstance(K, (int, np.integer)):
            return False, "Symmetry index K must be an integer"

        if K < 2 or K > N - 2:
            return False, f"Symmetry index K must lie in [2, {N - 2}] for N = {N}"

        return True, ""

    @staticmethod
    def validate_growth_exponent(p: Real, name: str = "p") -> Tuple[bool, str]:
        """Validate a nonlinearity growth exponent p > 2."""
        if not isinstance(p, Real) or math.isnan(float(p)):
            return False, f"{name} must be a real number"

        if p <= 2:
            return False, f"{name} must be greater than 2"

        return True, ""

    @staticmethod
    def validate_nodes(nodes: Sequence[float]) -> Tuple[bool, str]:
        """
        Validate grid nodes: finite, strictly positive and strictly increasing.

        Returns:
            tuple: (is_valid, error_message)
        """
        arr = np.asarray(nodes, dtype=float)

        if arr.ndim != 1 or arr.size < 3:
            return False, "A grid needs at least 3 nodes"

        if not np.all(np.isfinite(arr)):
            return False, "Grid nodes must be finite"

        if arr[0] <= 0:
            return False, "First grid node must be positive"

        if np.any(np.diff(arr) <= 0):
            return False, "Grid nodes must be strictly increasing"

        return True, ""

    @staticmethod
    def validate_sample_grid(grid: Sequence[float]) -> Tuple[bool, str]:
        """Validate a verification grid: nonempty, sorted, strictly positive."""
        arr = np.asarray(grid, dtype=float)

        if arr.ndim != 1 or arr.size == 0:
            return False, "Sample grid must be a nonempty 1D sequence"

        if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
            return False, "Sample grid must be finite and strictly positive"

        if np.any(np.diff(arr) < 0):
            return False, "Sample grid must be sorted"

        return True, ""
