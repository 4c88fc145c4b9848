"""Rotating vortex patches for the generalized SQG equation in the unit disc.

Submodules
----------
specfun
    Gamma-type functions, Bessel functions and Bessel-zero tables.
quadrature
    Gauss-Legendre, Gauss-Jacobi and adaptive Gauss-Kronrod rules.
greenkernel
    Green function of the spectral fractional Laplacian and its split into
    a planar singular part and a smooth remainder.
dispersion
    Angular velocities of the bifurcation points, limits and scans.
contour
    Boundary functional of m-fold patch perturbations.
branch
    Newton continuation of bifurcating branches.
cli
    Command-line front end (``python -m artifact``).
"""
from . import _backend
from .errors import (
    ArtifactError, DomainError, NumericalError, PoleError, DivergenceError,
    InvalidShapeError, OutOfGridError, ConvergenceError, QuadratureError,
    ToleranceNotMetError, StepTooLargeError, SingularJacobianError,
    PartialBranchError,
)

__version__ = "0.1.0"


def backend():
    """Name of the active kernel backend ("cython" or "python")."""
    return _backend.name


use_backend = _backend.use_backend
