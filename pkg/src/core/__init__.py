"""
Numerical core: exponent algebra, nonlinearities, discretizations and solvers.
"""

from .errors import (ConfigError, LinearSolveError, MaxIterationsError, NoSignChangeError,
                     OutputError, ParameterError, QuadratureError, SolverError, SuiteError)
from .nonlinearity import NonlinearitySpec
from .problem import ProblemParams

__all__ = [
    "ConfigError", "LinearSolveError", "MaxIterationsError", "NoSignChangeError", "OutputError",
    "ParameterError", "QuadratureError", "SolverError", "SuiteError",
    "NonlinearitySpec", "ProblemParams",
]
