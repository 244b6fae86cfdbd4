"""Simulator and diagnostics for spherically symmetric compressible flow
with Cattaneo-Christov heat conduction."""

__version__ = "0.1.0"

from ._kernels import BACKEND_NAME
from .constitutive import PhysParams, affine, constant
from .dynamics import ModelVariant, rhs
from .grid import RadialGrid
from .integrator import StepControl, run, step_imex, step_picard
from .state import RadialState, perturbation_data

__all__ = [
    "BACKEND_NAME",
    "ModelVariant",
    "PhysParams",
    "RadialGrid",
    "RadialState",
    "StepControl",
    "affine",
    "constant",
    "perturbation_data",
    "rhs",
    "run",
    "step_imex",
    "step_picard",
]
