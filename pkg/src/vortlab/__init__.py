"""Numerical laboratory for vorticity-direction regularity criteria of the
3D incompressible Navier-Stokes equations."""

from ._accel import USE_NUMBA
from .errors import VortlabError
from .fields import GridSpec, ScalarField, SpectralField, VectorField, linf_norm, lp_norm

__all__ = [
    "USE_NUMBA",
    "VortlabError",
    "GridSpec",
    "ScalarField",
    "SpectralField",
    "VectorField",
    "linf_norm",
    "lp_norm",
]
__version__ = "0.1.0"
