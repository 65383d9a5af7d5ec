"""Exception hierarchy shared by all termselect modules."""

from __future__ import annotations


class TermSelectError(Exception):
    """Base class for every error raised by this package."""


class UnknownMode(TermSelectError, ValueError):
    pass


class TermAbsent(TermSelectError, KeyError):
    pass


class DegenerateCollection(TermSelectError, ValueError):
    """Raised when a measure needs text outside the document and there is none."""


class EmptyRanking(TermSelectError, ValueError):
    pass


class InvalidCutoffSpec(TermSelectError, ValueError):
    pass


class ZeroMean(TermSelectError, ValueError):
    pass


class NonPositiveFactor(TermSelectError, ValueError):
    pass


class InvalidTransfer(TermSelectError, ValueError):
    pass


class InvalidAmount(TermSelectError, ValueError):
    pass


class UnsupportedProperty(TermSelectError, ValueError):
    pass


class DuplicateProfileId(TermSelectError, ValueError):
    pass


class NoRelevant(TermSelectError, ValueError):
    pass


class InsufficientData(TermSelectError, ValueError):
    pass


class MalformedInput(TermSelectError, ValueError):
    """Input file could not be parsed; message names the offending line."""
