"""Exception types shared across the package."""


class GuidedBoError(Exception):
    """Base class for all package errors."""


class InvalidPairing(GuidedBoError):
    """A knob index appears twice, or a pair maps an index onto itself."""


class IndexOutOfRange(GuidedBoError):
    """A knob index lies outside [0, dim)."""


class DimensionError(GuidedBoError):
    """A vector does not match the expected dimension."""


class InvalidBounds(GuidedBoError):
    """Box bounds are degenerate (lower >= upper) or malformed."""


class InvalidData(GuidedBoError):
    """Training data contains non-finite or otherwise unusable values."""


class NumericalFailure(GuidedBoError):
    """A linear-algebra operation failed beyond recoverable jitter."""


class InternalError(GuidedBoError):
    """An internal cache or state invariant was violated."""


class InvalidInput(GuidedBoError):
    """A scalar argument violates its documented range."""


class InvalidReferencePoint(GuidedBoError):
    """EHVI reference point is not dominated by the whole front."""


class EmptyAggregate(GuidedBoError):
    """Aggregation was requested over zero successful traces."""


class ConfigError(GuidedBoError):
    """A configuration file or spec is malformed; message names the field."""
