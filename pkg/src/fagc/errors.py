"""Exception hierarchy shared across the package."""


class FagcError(Exception):
    """Base class for every error raised by this package."""


class NonFinite(FagcError):
    """Input contains NaN or Inf."""


class DegenerateShape(FagcError):
    """A configuration collapses to a point (zero norm after centering)."""


class DimensionMismatch(FagcError):
    """Operands have incompatible dimensions or lengths."""


class ParamOutOfRange(FagcError):
    """A numeric parameter is outside its admissible range."""


class InsufficientPoints(FagcError):
    """An operation needs more points than were supplied."""


class AllDegenerate(FagcError):
    """Every candidate endpoint pair is identical or antipodal."""


class EmptyTrainingSet(FagcError):
    """fit() was called with no samples."""


class NotFitted(FagcError):
    """predict() or save was called on an unfitted model."""


class ZeroVariance(FagcError):
    """The observed values are constant, so R^2 is undefined."""


class CountMismatch(FagcError):
    """The number of supplied items does not match the declared layout."""


class ParseError(FagcError):
    """A file could not be parsed; the message names the offending line."""


class RaggedRow(ParseError):
    """A CSV row has a different number of cells than the header."""


class DuplicateId(ParseError):
    """The same sample id appears more than once."""


class UnmatchedId(FagcError):
    """A label row references an id absent from the feature table."""


class VersionMismatch(FagcError):
    """A persisted file declares an unsupported format version."""


class KindMismatch(FagcError):
    """A persisted model has a different kind than the caller expected."""
