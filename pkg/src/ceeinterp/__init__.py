"""Analytic interpolation with degree constraint via the covariance extension equation."""

__version__ = "0.1.0"

from .cee import CEEParameters, CEESolution, positive_degree, solve_direct
from .errors import InterpolationError
from .homotopy import HomotopyOptions, continue_path, solve_homotopy
from .poly import Polynomial, RationalFunction
from .problem import InterpolationProblem, normalize, to_caratheodory
from .solver import solve_interpolation

__all__ = [
    "__version__",
    "CEEParameters",
    "CEESolution",
    "HomotopyOptions",
    "InterpolationError",
    "InterpolationProblem",
    "Polynomial",
    "RationalFunction",
    "continue_path",
    "normalize",
    "positive_degree",
    "solve_direct",
    "solve_homotopy",
    "solve_interpolation",
    "to_caratheodory",
]
