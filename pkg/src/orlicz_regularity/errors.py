"""Exception hierarchy shared by all modules."""


class OrliczError(Exception):
    """Base class for all package errors."""


class DomainError(OrliczError):
    """An argument is outside the mathematical domain of an operation."""


class GeometryError(OrliczError):
    """A geometric precondition fails (point outside box, set touching boundary, ...)."""


class RefinementError(OrliczError):
    """Mesh step too coarse or too fine for the requested geometry."""


class ConfigError(OrliczError):
    """Scenario configuration is malformed or semantically invalid."""


class NumericError(OrliczError):
    """Non-finite values or violated structural assumptions detected."""


class InfeasibleError(OrliczError):
    """Constraint set of an obstacle problem is empty at the discrete level."""


class ShapeError(OrliczError):
    """Fields defined on incompatible meshes."""


class UndefinedRatioError(OrliczError):
    """A ratio against a vanishing denominator was requested."""
