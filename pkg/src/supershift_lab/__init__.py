"""Numerical laboratory for supershifts, superoscillations and their discrete Taylor analysis."""

from .errors import (
    ConfigError,
    DegenerateNodesError,
    DomainError,
    NodeCollisionError,
    PrecisionError,
    ShapeError,
    SizeError,
    SupershiftError,
    ValidationError,
)
from .precision import DEFAULT_POLICY, GaussianRational, PrecisionPolicy

__all__ = [
    "ConfigError",
    "DEFAULT_POLICY",
    "DegenerateNodesError",
    "DomainError",
    "GaussianRational",
    "NodeCollisionError",
    "PrecisionError",
    "PrecisionPolicy",
    "ShapeError",
    "SizeError",
    "SupershiftError",
    "ValidationError",
]

__version__ = "0.1.0"
