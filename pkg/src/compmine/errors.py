"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class CompmineError(Exception):
    """Base class for all toolkit errors."""


# -- core ---------------------------------------------------------------


class UnknownLabel(CompmineError):
    """A string does not name one of the eight comparison labels."""


class OverlappingElements(CompmineError):
    """Element spans of different kinds share a token."""


# -- ingest -------------------------------------------------------------


class ParseError(CompmineError):
    """One or more records of an input file are invalid.

    Carries every offending record so nothing is silently dropped.
    """

    def __init__(self, message: str, records: list[tuple[int, str]] | None = None):
        super().__init__(message)
        self.records = records or []


class SpanRemapError(CompmineError):
    """An annotation span lands entirely on text deleted by normalization."""


# -- augment ------------------------------------------------------------


class EmptyCorpus(CompmineError):
    """No comparative sentences available to build dictionaries from."""


class MissingLabel(CompmineError):
    """Predicate wordlist entries were given without a comparison label."""


class SlotUnavailable(CompmineError):
    """A template needs a dictionary slot that has no entries."""


class TargetUnreachable(CompmineError):
    """Synthesis could not meet a per-label target within the attempt budget."""


# -- backends -----------------------------------------------------------


class CapabilityMissing(CompmineError):
    """The backend does not advertise the requested capability."""


class BackendUnavailable(CompmineError):
    """An external backend process or connection died."""


class AlignmentError(CompmineError):
    """An external backend returned a row count different from the token count."""


class EmptyTrainingSet(CompmineError):
    """No usable training examples for the requested task."""


class TaskMismatch(CompmineError):
    """The dataset or model does not fit the requested task."""


class HandshakeFailure(CompmineError):
    """The external backend's hello message was malformed or incompatible."""


class AdapterTimeout(CompmineError):
    """The external backend did not answer within the deadline."""


# -- ensemble -----------------------------------------------------------


class ShapeMismatch(CompmineError):
    """Logit tensors to be combined do not share a shape."""


class WeightCountMismatch(CompmineError):
    """Weight count differs from the number of ensemble members."""


class TooFewSamples(CompmineError):
    """Dataset too small for the requested fold count."""


# -- pipeline -----------------------------------------------------------


class AllSetsEmpty(CompmineError):
    """Quadruple generation was called with four empty element sets."""


class MissingDatasetVersion(CompmineError):
    """An experiment preset references a dataset version that was not built."""


# -- eval ---------------------------------------------------------------


class IdMismatch(CompmineError):
    """Gold and predicted datasets do not cover the same sentence ids."""
