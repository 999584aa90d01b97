"""Exception types shared across the package."""


class UisearchError(Exception):
    """Base class for all package errors."""


class VocabularyError(UisearchError):
    """Vocabulary file is malformed: missing/empty section or duplicates."""


class ParseError(UisearchError):
    """Model output could not be parsed, even after repair.

    Carries the raw text so callers can log or retry with it.
    """

    def __init__(self, message: str, raw_text: str = ""):
        super().__init__(message)
        self.raw_text = raw_text


class ProviderError(UisearchError):
    """A remote provider (chat or embedding) failed after retries."""


class ExtractionError(UisearchError):
    """Every extraction attempt produced unusable output."""

    def __init__(self, message: str, raw_text: str = ""):
        super().__init__(message)
        self.raw_text = raw_text


class InputError(UisearchError):
    """Caller-supplied data violates a precondition."""


class DuplicateError(UisearchError):
    """An entry with the same id is already indexed."""


class StoreError(UisearchError):
    """Vector store is inconsistent or its files are corrupt."""


class QueryError(UisearchError):
    """Query is structurally invalid (e.g. no positive weights)."""


class UnknownFacetError(QueryError):
    """Query names a facet outside the closed 14-facet set."""


class FlowError(UisearchError):
    """Flow query requested on a screen without the needed flow facet."""


class NotFoundError(UisearchError):
    """Referenced screen id does not exist in the store."""


class FacetImportError(UisearchError):
    """A facet selected for import is empty in the source record."""


class MetricError(UisearchError):
    """Evaluation input is empty or references unknown labels."""
