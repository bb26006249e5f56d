"""Outer estimates of domains of dependence and supports for scalar conservation laws."""
from .errors import (CFLViolation, EmptySet, FunnelError, GridMismatch, NotTubular,
                     PreconditionError, SupportOverflow)
from .geometry import Grid, GridSet, Raster
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "CFLViolation", "EmptySet", "FunnelError", "Grid", "GridMismatch", "GridSet",
           "NotTubular", "PreconditionError", "Raster", "SupportOverflow", "__version__"]
