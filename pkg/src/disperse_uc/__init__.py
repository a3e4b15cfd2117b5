"""Pseudospectral simulation and numerical checks for i u_t - D^{2m} u = V u."""

from .errors import (
    ConfigError,
    DisperseError,
    DomainError,
    FitError,
    NumericalError,
    ResolutionError,
    SingularityError,
)
from .grid import ComplexField, Grid1D, Grid2D, make_grid, make_grid2d

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "ConfigError",
    "DisperseError",
    "DomainError",
    "FitError",
    "Grid1D",
    "Grid2D",
    "NumericalError",
    "ResolutionError",
    "SingularityError",
    "make_grid",
    "make_grid2d",
]
