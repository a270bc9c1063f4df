"""Numerical laboratory for 1D/2D/3D isentropic compressible flow with
density-degenerate viscosity: transformed-density solver, vacuum dynamics
and finite-time blow-up diagnostics."""

from .grid import Grid
from .linearized import State, StepConfig
from .model import Params, validate_params
from .picard import PicardConfig, solve

__all__ = [
    "Grid",
    "Params",
    "PicardConfig",
    "State",
    "StepConfig",
    "solve",
    "validate_params",
]

__version__ = "0.1.0"
