"""Sparse-plus-smooth image recovery from partial Fourier measurements."""

from ._kernels import BACKEND
from .operators import Measurement, SamplingPattern, adjoint, forward
from .solvers import ProblemInstance, SolverConfig, SolveResult, solve_coupled, solve_decoupled

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Measurement",
    "SamplingPattern",
    "adjoint",
    "forward",
    "ProblemInstance",
    "SolverConfig",
    "SolveResult",
    "solve_coupled",
    "solve_decoupled",
]
