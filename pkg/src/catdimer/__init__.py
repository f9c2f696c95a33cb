"""Entangled cat states of two Kerr cavities stabilized by engineered two-photon loss."""

from .errors import (CatDimerError, ConfigError, DegenerateInput, DimensionMismatch,
                     DivergentSeries, ManifoldLeakage, NonPSDInput, NonUniqueSteadyState,
                     SingularParameter, SolverFailure, TruncationError, TruncationWarning)
from .model import ABParams, CDParams, MismatchParams

__version__ = "0.1.0"

__all__ = [
    "ABParams", "CDParams", "MismatchParams",
    "CatDimerError", "ConfigError", "DegenerateInput", "DimensionMismatch", "DivergentSeries",
    "ManifoldLeakage", "NonPSDInput", "NonUniqueSteadyState", "SingularParameter",
    "SolverFailure", "TruncationError", "TruncationWarning",
]
