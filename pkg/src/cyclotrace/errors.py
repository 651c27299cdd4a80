"""Shared exception types for the cyclotrace package."""


class CyclotraceError(Exception):
    """Base class for all package-specific errors."""


class NonFundamental(CyclotraceError):
    """A fundamental discriminant was required."""


class NotDefinite(CyclotraceError):
    """A positive definite quadratic form was required."""


class NotPositiveDefinite(CyclotraceError):
    """A positive definite lattice was required."""


class SquareDiscriminant(CyclotraceError):
    """A non-square discriminant was required."""


class SingularGram(CyclotraceError):
    """The Gram matrix must be nonsingular."""


class IncompatibleEmbedding(CyclotraceError):
    """The sublattice embedding is inconsistent with the Gram matrices."""


class GammaPole(CyclotraceError):
    """A Gamma-factor ratio in the bracket coefficients is undefined."""


class InsufficientPrecision(CyclotraceError):
    """A series is not complete far enough for the requested operation."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class HypothesisViolated(CyclotraceError):
    """The CM point lies on one of the geodesics, so the trace identity does not apply."""


class PoleAtZ(CyclotraceError):
    """The evaluation point is a pole of the meromorphic form."""


class PoleOnGeodesic(CyclotraceError):
    """A pole of the meromorphic form lies on the integration cycle."""


class NoConvergence(CyclotraceError):
    """An adaptive truncation hit its ceiling before reaching the tolerance."""


class UnsupportedK(CyclotraceError):
    """No closed formula is available for this weight parameter."""


class DivergentParameters(CyclotraceError):
    """Hypergeometric parameters outside the supported convergence region."""
