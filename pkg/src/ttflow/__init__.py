"""Explicit PDE time stepping on tensor-train compressed grids."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    NumericalFailure,
    RangeError,
    ShapeError,
    StiffnessError,
)
from .mps import EXACT, Mps, TruncationParams
from .mpo import Mpo
from .problems import InitialCondition, PdeProblem
from .tensorization import GridSpec, Layout

__all__ = [
    "CapacityError",
    "ConfigError",
    "EXACT",
    "GridSpec",
    "InitialCondition",
    "Layout",
    "Mpo",
    "Mps",
    "NumericalFailure",
    "PdeProblem",
    "RangeError",
    "ShapeError",
    "StiffnessError",
    "TruncationParams",
    "__version__",
]
