"""Exception types raised across the package.

Every library-specific failure derives from :class:`ActifiltError` so callers
(and the CLI) can catch one base class.
"""


class ActifiltError(Exception):
    """Base class for all actifilt errors."""


# --- ingestion ---------------------------------------------------------------

class MalformedHeader(ActifiltError):
    """CSV header does not match the documented column layout."""


class MalformedRow(ActifiltError):
    """A CSV row cannot be parsed (e.g. non-numeric timestamp)."""


class UnsortedTimestamps(ActifiltError):
    """Timestamps are not strictly increasing."""


class ExcessiveJitter(ActifiltError):
    """Sample spacing deviates from the nominal period by more than 20%."""


class EmptyFile(ActifiltError):
    """Input file contains no data rows."""


class UnknownBehaviorName(ActifiltError):
    """Label file names a behavior outside the seven known classes."""


class OverlappingIntervals(ActifiltError):
    """Label intervals overlap or are malformed."""


# --- series operations -------------------------------------------------------

class SeriesTooShort(ActifiltError):
    """Series is shorter than the operation's minimum length."""


class AllMissing(ActifiltError):
    """Imputation requires at least one known value."""


class MissingValues(ActifiltError):
    """Operation requires a series without missing values."""


class EvenWindow(ActifiltError):
    """Median filter window must be odd."""


class CutoffOutOfRange(ActifiltError):
    """Filter cutoff must lie strictly between 0 and the Nyquist frequency."""


class InvalidWindowOrder(ActifiltError):
    """Savitzky-Golay window/polyorder combination is invalid."""


# --- featurization -----------------------------------------------------------

class RecordingShorterThanWindow(ActifiltError):
    """Recording has fewer samples than one analysis window."""


class WindowTooShort(ActifiltError):
    """Feature extraction needs at least 8 samples per window."""


class TooFewFeatures(ActifiltError):
    """Feature selection target exceeds the available feature count."""


class EmptyMatrix(ActifiltError):
    """Operation requires a non-empty feature matrix."""


# --- models / evaluation -----------------------------------------------------

class SingleClass(ActifiltError):
    """Training data must contain at least two classes."""


class ShapeMismatch(ActifiltError):
    """Array shapes are inconsistent (e.g. feature count vs. model)."""


class NonFiniteFeature(ActifiltError):
    """Feature matrix contains NaN or infinite values."""


class Unsupported(ActifiltError):
    """Requested capability is not defined for this model kind."""


class LengthMismatch(ActifiltError):
    """Paired label vectors differ in length."""


class ClassTooSmall(ActifiltError):
    """A class has too few rows for the requested split."""


class InvalidConfig(ActifiltError):
    """Configuration value out of range or malformed."""
