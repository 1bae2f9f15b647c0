"""Exception types shared across the pipeline.

Everything derives from DialectIdError so batch drivers (CLI, dataset
builder) can catch pipeline failures without swallowing programming errors.
"""


class DialectIdError(Exception):
    """Base class for all pipeline errors."""


# --- TextGrid parsing ---

class MalformedTextGrid(DialectIdError):
    """Structurally invalid TextGrid text (bad header, counts, numbers)."""


class EncodingError(DialectIdError):
    """Input bytes are not UTF-8 or BOM-marked UTF-16."""


class InvariantViolation(DialectIdError):
    """Parsed values violate a type invariant (e.g. overlapping intervals)."""


class UnknownTier(DialectIdError):
    """Requested tier name does not exist in the grid."""


class MalformedAliasTable(DialectIdError):
    """Bad line or unknown vowel in a label-alias table."""


# --- audio ---

class UnsupportedFormat(DialectIdError):
    """WAV container is valid but not PCM-16 mono/stereo."""


class CorruptContainer(DialectIdError):
    """Bytes are not a well-formed RIFF/WAVE container."""


class OutOfRange(DialectIdError):
    """Slice bounds fall outside the signal."""


class EmptySignal(DialectIdError):
    """Operation requires at least one sample."""


# --- acoustics ---

class DegenerateFrame(DialectIdError):
    """Analysis frame has zero energy."""


class NoConvergence(DialectIdError):
    """Root refinement hit its iteration cap."""


# --- features ---

class EmptyTrack(DialectIdError):
    """Cannot sample values from an empty track."""


class SegmentTooShort(DialectIdError):
    """Vowel segment shorter than the 10 ms minimum."""


class NoValidFormantFrames(DialectIdError):
    """No analysis frame of the segment produced three formants."""


class ManifestError(DialectIdError):
    """Corpus manifest row is missing fields or names an unknown class."""


class CsvFormatError(DialectIdError):
    """Feature CSV has the wrong shape or an unparseable value."""


# --- synthesis ---

class SpecInvalid(DialectIdError):
    """Vowel specification violates its invariants."""


# --- forest ---

class EmptyNode(DialectIdError):
    """Gini impurity of zero samples is undefined."""


class DegenerateData(DialectIdError):
    """Training data contains fewer than two classes."""


class DimensionMismatch(DialectIdError):
    """Feature row width does not match the model."""


class ModelFormatError(DialectIdError):
    """Model file is unreadable or has an unsupported version."""


class InsufficientClassSamples(DialectIdError):
    """A class has fewer samples than the number of CV folds."""


# --- evaluation ---

class ClassTooSmall(DialectIdError):
    """A class has too few rows to split."""


class LengthMismatch(DialectIdError):
    """Label sequences differ in length."""


class EmptyMatrix(DialectIdError):
    """Metric undefined on an empty confusion matrix."""
