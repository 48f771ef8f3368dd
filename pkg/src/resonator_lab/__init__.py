"""Numerical companion for resonator lower bounds on lattice-point and convolution error terms."""

from .arith import ArithTables, build_tables, cached_tables, constants_report
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    PropertyFailure,
    ResonatorLabError,
    SearchFailure,
)
from .quad import QuadraturePolicy, QuadResult
from .resonator import GapProfile, GSigmaSpec, MollifierPhi, TransitionPhi, WeightMeasure

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ArithTables",
    "ConfigError",
    "DomainError",
    "GSigmaSpec",
    "GapProfile",
    "MollifierPhi",
    "PropertyFailure",
    "QuadResult",
    "QuadraturePolicy",
    "ResonatorLabError",
    "SearchFailure",
    "TransitionPhi",
    "WeightMeasure",
    "build_tables",
    "cached_tables",
    "constants_report",
]
