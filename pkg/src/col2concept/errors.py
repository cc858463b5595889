"""Exception hierarchy shared by ingestion, indexes, and annotation."""


class C2Error(Exception):
    """Base class for every error raised by this package."""


class DataError(C2Error):
    """Input data is missing, malformed, or insufficient."""


class IndexStoreError(C2Error):
    """A persisted index is missing, truncated, or inconsistent."""


class AllEmpty(DataError):
    """Every cell of a column is empty."""


class MalformedFile(DataError):
    """A corpus or input file could not be parsed."""


class MalformedLine(DataError):
    """A triple file line does not have the expected shape."""


class EmptyTable(DataError):
    """A table has no columns or no rows."""


class EmptyUniverse(DataError):
    """No concept qualified for the concept universe."""


class EmptyCaseSet(DataError):
    """An evaluation manifest contains no cases."""


class EmptySample(DataError):
    """Pattern generalization was given no non-empty values."""


class NoEvidence(DataError):
    """No entity of a column was found in any source."""


class NoParseableValues(DataError):
    """A numeric column contains no parseable numbers."""


class CyclicHierarchy(DataError):
    """The concept hierarchy contains a cycle."""


class InvalidRange(C2Error):
    """Interval query with min greater than max."""


class InvalidEpsilon(C2Error):
    """Tuple matching tolerance outside [0, 1)."""


class BothNumeric(C2Error):
    """Tuple matching requires at least one categorical value."""


class UnknownSource(IndexStoreError):
    """Lookup against a source id absent from the index."""


class CorruptIndex(IndexStoreError):
    """Persisted index failed checksum or format validation."""
