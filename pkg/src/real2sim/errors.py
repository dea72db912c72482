"""Exception hierarchy shared by all real2sim modules.

Every error raised by the library derives from :class:`Real2SimError`, so CLI
code can catch one type and map it to a nonzero exit code.
"""

from __future__ import annotations


class Real2SimError(Exception):
    """Base class for all library errors."""


class ParseError(Real2SimError):
    """A file could not be parsed at all (bad JSON, bad CSV, ...)."""


class ValidationError(Real2SimError):
    """Parsed data violates a domain invariant; names the offending record."""


class FormatError(Real2SimError):
    """Binary file has a bad magic value, version, or structure."""


class TruncationError(FormatError):
    """Binary payload is shorter than its header promises."""


class UnknownClassError(ValidationError):
    """A class name falls outside the evaluated class set."""


class DomainError(Real2SimError):
    """A numeric argument is outside the mathematical domain of an operation."""


class FrameMismatchError(Real2SimError):
    """Two per-frame collections do not cover the same frame ids."""


class DegenerateError(Real2SimError):
    """Input is degenerate (zero-length geometry, zero variance, ...)."""


class SizeError(Real2SimError):
    """An image is too small for the requested operation."""


class ShapeMismatchError(Real2SimError):
    """Two arrays that must have equal shape do not."""


class TooSmallError(SizeError):
    """Image smaller than the metric's minimum window."""


class DimMismatchError(Real2SimError):
    """Feature sets with different dimensionality."""


class InsufficientSamplesError(Real2SimError):
    """Too few samples to estimate a covariance."""


class EmptySceneError(Real2SimError):
    """A scene-level aggregate was requested over zero items."""


class EmptyInputError(Real2SimError):
    """An operation that needs at least one element received none."""


class MissingBaselineError(Real2SimError):
    """Gap table input lacks the baseline real row."""


class UsageError(Real2SimError):
    """Bad command-line usage."""
