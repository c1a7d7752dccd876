"""Semantic exception hierarchy for the nndist package."""


class NNDistError(Exception):
    """Base error for this package."""


class ValidationError(NNDistError, ValueError):
    """Inputs violate a contract: domain, type, shape or unknown parameters."""


class ShapeError(ValidationError):
    """Array shapes are inconsistent with the owning network spec."""


class UnsupportedArchitectureError(ValidationError):
    """The requested operation is restricted to a smaller architecture class."""


class AbsoluteContinuityError(ValidationError):
    """KL divergence requested between mutually singular distributions."""


class NumericalError(NNDistError, ArithmeticError):
    """A computation produced non-finite values or failed to converge."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach its error target."""


class DegenerateFitError(NNDistError):
    """Least-squares rate fit is undefined (constant grid or zero errors)."""


class SchemaError(ValidationError):
    """A CSV or JSON document does not match its documented schema."""
