"""Exception types raised by tourmine.

All inherit from TourmineError (a ValueError) so callers can catch either
the specific class or the family.
"""


class TourmineError(ValueError):
    """Base class for all tourmine errors."""


# catalog / file ingestion
class MalformedRow(TourmineError):
    """A row in an input file violates the schema (bad coordinate, flag, ...)."""


class DuplicateId(TourmineError):
    """An id appears more than once where uniqueness is required."""


class EmptyFile(TourmineError):
    """An input file contains no data rows."""


# dataset generation / matrix construction
class InvalidCounts(TourmineError):
    """Requested generator counts are inconsistent (e.g. events < visitors)."""


class UnknownPlaceId(TourmineError):
    """A visit event references a place id absent from the catalog."""


class UnknownVisitorId(TourmineError):
    """A visit event references a visitor id absent from the visitor list."""


class FoldsTooLarge(TourmineError):
    """More cross-validation folds requested than positive cells available."""


# mining
class ItemOutOfRange(TourmineError):
    """An item ordinal does not exist in the transaction matrix."""


class InvalidThreshold(TourmineError):
    """A support/confidence threshold is outside its valid range."""


class EmptyRuns(TourmineError):
    """Run aggregation called with no run records."""


# clustering
class KTooLarge(TourmineError):
    """More clusters requested than points available."""


class DimensionMismatch(TourmineError):
    """Vector or assignment dimensions do not line up."""


# planning
class InvalidCoordinate(TourmineError):
    """A latitude/longitude pair is outside the valid ranges."""


class EmptyRecommendations(TourmineError):
    """Trip planning requested with no recommendations to schedule."""


# evaluation
class ZeroBaseline(TourmineError):
    """Reduction rate requested against a non-positive baseline."""


class EmptyRows(TourmineError):
    """Aggregation called with no rows."""


class LengthMismatch(TourmineError):
    """Paired sequences have different lengths (or are empty)."""
