"""Radial spectral toolkit for fractional Laplacians on R^N, N = 1, 2, 3.

Ground states of ``(-Delta)^s Q + Q - |Q|^alpha Q = 0``, their linearization,
continuation in ``s``, fractional Schrodinger spectra, the s-harmonic
extension and resolvent and heat kernels.
"""
from .errors import FraclapError
from .ground_state import GroundState, ProblemParams, alpha_star, solve_ground_state
from .kernels import BACKEND
from .spectral import RadialField, RadialGrid, SectorIndex, fractional_laplacian, make_grid

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FraclapError",
    "GroundState",
    "ProblemParams",
    "RadialField",
    "RadialGrid",
    "SectorIndex",
    "alpha_star",
    "fractional_laplacian",
    "make_grid",
    "solve_ground_state",
    "__version__",
]
