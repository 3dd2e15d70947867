"""Exception hierarchy used across the package."""


class SupershiftError(Exception):
    """Base class for all package errors."""


class DomainError(SupershiftError, ValueError):
    """An argument or sample point lies outside the admissible domain."""


class ValidationError(SupershiftError, ValueError):
    """A structural invariant (ordering, range, shape) is violated."""


class SizeError(SupershiftError, ValueError):
    """A requested expansion exceeds the configured size cap."""


class DegenerateNodesError(SupershiftError, ValueError):
    """Two interpolation nodes coincide within the merge tolerance."""


class NodeCollisionError(SupershiftError, ValueError):
    """An evaluation point coincides with an interpolation node."""


class PrecisionError(SupershiftError, ArithmeticError):
    """The working precision is below what the guard rule requires."""


class ShapeError(SupershiftError, ValueError):
    """Two objects that must describe the same polynomial space do not."""


class ConfigError(SupershiftError, ValueError):
    """An experiment configuration failed validation."""
