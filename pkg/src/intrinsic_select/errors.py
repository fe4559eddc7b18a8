"""Exception hierarchy for intrinsic_select.

Domain violations on plain scalar arguments (x outside [0, 1], negative
shapes, bad dimensions) raise the builtin ``ValueError``; the classes here
cover failures that carry library-specific meaning.
"""


class IntrinsicSelectError(Exception):
    """Base class for all intrinsic_select errors."""


class SingularDesignError(IntrinsicSelectError):
    """Design (sub)matrix is numerically rank deficient."""


class InvalidModelError(IntrinsicSelectError):
    """Model specification is unusable for the given dataset."""


class NestingViolationError(IntrinsicSelectError):
    """An operation that requires nested models received a non-nested pair."""


class DegenerateFitError(IntrinsicSelectError):
    """A residual sum of squares is zero where a positive value is required."""


class QuadratureFailureError(IntrinsicSelectError):
    """Numerical integration failed to converge within the node cap."""


class ConvergenceFailureError(IntrinsicSelectError):
    """A series or mixture truncation exceeded its term cap."""


class UnsupportedRegimeError(IntrinsicSelectError):
    """Arguments fall outside the regime the implementation supports."""


class EnumerationCapError(IntrinsicSelectError):
    """Model space too large to enumerate; use the stochastic search."""


class InternalConsistencyError(IntrinsicSelectError):
    """A computed quantity violated an internal invariant beyond rounding noise."""
