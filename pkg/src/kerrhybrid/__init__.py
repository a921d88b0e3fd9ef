"""Hybrid phase-space/Fock-space simulation of driven nonlinear resonators."""

from .config import (
    ConstantDrive,
    DimensionlessConfig,
    KerrNonlinearity,
    PiecewiseConstantDrive,
    PolynomialNonlinearity,
    SimConfig,
)
from .errors import *  # noqa: F401,F403
from .fock_gaussian import FockGaussianParams
from .gaussian_state import DstsShape, GaussianState
from .hybrid import HybridState, Trajectory, evolve

__version__ = "0.1.0"
