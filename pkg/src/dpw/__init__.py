"""Loop-group construction of constant curvature surfaces from holomorphic potentials."""

from . import factor, geometry, loopalg, ode, pipeline, potential, realform, sym
from .loopalg import LaurentMatrix
from .pipeline import RunConfig, run_pipeline

__all__ = [
    "LaurentMatrix",
    "RunConfig",
    "run_pipeline",
    "factor",
    "geometry",
    "loopalg",
    "ode",
    "pipeline",
    "potential",
    "realform",
    "sym",
]

__version__ = "0.1.0"
