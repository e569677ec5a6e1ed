"""Exception types shared across the package.

Every error carries an optional ``details`` mapping that the service
layer forwards verbatim in error responses.  ``code`` is the stable
machine-readable name clients can switch on.
"""

from __future__ import annotations

from typing import Any


class MoodcalError(Exception):
    def __init__(self, message: str = "", details: dict[str, Any] | None = None):
        super().__init__(message)
        self.details = dict(details or {})

    @property
    def code(self) -> str:
        return type(self).__name__


class ValidationFailed(MoodcalError):
    """A value violates a documented invariant."""


# scheduling
class Infeasible(MoodcalError):
    """No slot assignment satisfies the hard constraints."""


class InstanceTooLarge(MoodcalError):
    """Problem exceeds the exhaustive solver's enumeration guard."""


class EmptySchedule(MoodcalError):
    """Objective evaluation needs at least one placement."""


# heart-rate pipeline
class NoPeaksFound(MoodcalError):
    """Detection produced no peaks above the adaptive threshold."""


class TooFewPeaks(MoodcalError):
    """At least two peaks are needed to form one interval."""


class SeriesTooShort(MoodcalError):
    """Series does not cover a single window."""


class OutOfRange(MoodcalError):
    """Scalar outside its documented range."""


# sequence models
class ShapeMismatch(MoodcalError):
    """Tensor arguments disagree with the model's shapes."""


class SingleClassDataset(MoodcalError):
    """Training needs at least two classes."""


class EmptyInput(MoodcalError):
    """Metric over an empty collection is undefined."""


# activity classification
class MalformedEvent(MoodcalError):
    """Activity event is missing fields required by its kind."""


class EmptyTable(MoodcalError):
    """Operation needs a table with at least one row."""


class ClassTooSmall(MoodcalError):
    """A class has too few rows to interpolate neighbours."""


# service
class NotFound(MoodcalError):
    """Referenced entity does not exist."""


class NoEvents(MoodcalError):
    """Solving requires at least one event."""


class ModelMissing(MoodcalError):
    """Inference requested before any model was trained."""


class CorruptLog(MoodcalError):
    """Persisted log has a gap or an unparsable entry."""
