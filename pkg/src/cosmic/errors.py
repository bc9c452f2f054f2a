"""Typed exceptions shared across the package.

Two families matter for the CLI exit-code contract: InputError (bad files,
bad arguments, mismatched shapes -- exit code 2) and NumericError (the math
itself failed -- exit code 3).  Everything raised by this package derives
from CosmicError so callers can catch one root type.
"""


class CosmicError(Exception):
    """Root of the package exception hierarchy."""


class InputError(CosmicError):
    """Caller-supplied data or arguments are unusable.  CLI exit code 2."""


class NumericError(CosmicError):
    """A computation produced non-finite or otherwise unusable values.  CLI exit code 3."""


# -- data validation ---------------------------------------------------------

class EmptyDataset(InputError):
    """A matrix, label file, or score file contains no usable rows."""


class NonFiniteValue(InputError):
    """NaN or infinity found in input data."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class MismatchedIds(InputError):
    """Two id sets that must pair bijectively do not."""


class DuplicateId(InputError):
    """The same id appears twice where ids must be unique."""


class DimMismatch(InputError):
    """Embedding dimensions disagree where they must match."""


class TooFewRows(InputError):
    """Fewer data rows than the estimator needs (for example n < modes)."""


class TooFewModels(InputError):
    """A hierarchy needs at least two model embedding sets."""


# -- file formats -------------------------------------------------------------

class BadMagic(InputError):
    """File does not start with the expected magic bytes."""


class VersionUnsupported(InputError):
    """File declares a format version or dtype this reader does not handle."""


class TruncatedPayload(InputError):
    """File ends before the declared payload does."""


class ParseError(InputError):
    """A text file line could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class IoFailure(InputError):
    """An underlying file operation failed (missing file, permission)."""


# -- domain checks ------------------------------------------------------------

class OutOfRange(InputError):
    """A scalar argument lies outside its documented domain."""


class NotADistribution(InputError):
    """Probabilities are negative or do not sum to one."""


class ShapeMismatch(InputError):
    """Array shapes are incompatible for the requested operation."""


class NonUniformConcept(InputError):
    """A joint's concept marginal must be uniform for the bound check."""


class NoCommonIds(InputError):
    """Two labelings share no ids, so agreement is undefined."""


class LengthMismatch(InputError):
    """Paired vectors must have equal length (and enough entries)."""


class InsufficientSamples(InputError):
    """Not enough samples for a covariance-based estimate."""


# -- numeric failures ---------------------------------------------------------

class NonFiniteLoss(NumericError):
    """Training loss became NaN or infinite."""


class SingularCovariance(NumericError):
    """Covariance stayed singular even after ridging."""


class ZeroMarginalEntropy(NumericError):
    """Normalized score is undefined when the marginal entropy is zero."""


class AllZeroRows(NumericError):
    """Every row pair had a zero-norm member; cosine agreement is undefined."""


# -- warnings ------------------------------------------------------------------

class DegenerateDimension(UserWarning):
    """A feature dimension has zero variance; its scale is left at one."""


class NearDuplicateInputs(UserWarning):
    """Source and summary embeddings are nearly identical row for row."""
