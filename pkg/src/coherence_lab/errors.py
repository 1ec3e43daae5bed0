"""Exception hierarchy.

Every error raised by the library derives from :class:`CoherenceLabError`,
which itself is a ``ValueError`` so callers that only care about bad input
can catch the builtin.
"""


class CoherenceLabError(ValueError):
    """Base class for all library errors."""


class InvalidState(CoherenceLabError):
    """A matrix violates a density-matrix invariant (trace, positivity)."""


class NotHermitian(InvalidState):
    pass


class NotPSD(InvalidState):
    pass


class NoConvergence(CoherenceLabError):
    pass


class DimensionMismatch(CoherenceLabError):
    pass


class NonPositiveArgument(CoherenceLabError):
    pass


class LengthMismatch(DimensionMismatch):
    pass


class SupportViolation(CoherenceLabError):
    pass


class AlphaOutOfRange(CoherenceLabError):
    pass


class DimensionTooLarge(CoherenceLabError):
    pass


class NotIncoherentKraus(CoherenceLabError):
    pass


class HeterogeneousOutputs(CoherenceLabError):
    pass


class BadRank(CoherenceLabError):
    pass


class InfeasibleShape(CoherenceLabError):
    pass


class NotComplete(CoherenceLabError):
    """Kraus operators fail the completeness relation sum K^dag K = I."""


class ParseError(CoherenceLabError):
    pass


class InternalConsistencyError(RuntimeError):
    """A result contradicts a guaranteed mathematical property."""
