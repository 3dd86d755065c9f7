"""Exception types shared across the lectio modules.

Every operational failure raises a subclass of :class:`LectioError`; the
service layer maps these onto API error codes.  Absence of a record is never
an exception (lookups return ``None``).
"""


class LectioError(Exception):
    """Base class for all lectio errors."""


# -- document parsing -------------------------------------------------------

class ParseError(LectioError):
    """A document does not conform to its file format."""


class ValidationError(LectioError):
    """A parsed value violates a domain invariant."""


class PairingError(ParseError):
    """STATE rows in a behavioral export cannot be paired into intervals."""


class OrderError(ParseError):
    """Transcript segments are out of order beyond the allowed tolerance."""


class EmptyInput(LectioError):
    """The input holds no usable content (e.g. whitespace-only transcript)."""


# -- evaluation -------------------------------------------------------------

class EmptyReference(LectioError):
    """WER is undefined for an empty reference."""


class MissingHypothesis(LectioError):
    """An engine did not supply a hypothesis for every benchmark fragment."""


class LengthMismatch(LectioError):
    """Prediction and gold sequences differ in length."""


class IdMismatch(LectioError):
    """Prediction and gold sentences are not aligned by sentence_id."""


# -- consensus --------------------------------------------------------------

class KindMismatch(LectioError):
    """The feature's event kind does not match the requested merge."""


class NoObservations(LectioError):
    """A merge was requested over an annotation with no observations."""


class TooFewObservations(LectioError):
    """Agreement needs at least two observations."""


# -- alignment / classification ---------------------------------------------

class LectureMismatch(LectioError):
    """Transcript and annotation reference different lectures."""


class EmptyDataset(LectioError):
    """Training requires a non-empty dataset."""


class RemoteUnavailable(LectioError):
    """The remote inference endpoint could not be reached in time."""


class ProtocolError(LectioError):
    """The remote inference endpoint returned a malformed response."""


class LabelMismatch(LectioError):
    """A remote response scored labels outside the model's label set."""


class UnknownFeature(LectioError):
    """An event or request references a feature id outside the taxonomy."""


# -- summaries --------------------------------------------------------------

class MissingDuration(LectioError):
    """Trend rates need a known duration for every lecture."""


class ZeroDuration(LectioError):
    """Trend rates are undefined for zero-length lectures."""


# -- persistence ------------------------------------------------------------

class ForeignKeyError(LectioError):
    """A stored record references a missing parent record."""


class ConflictError(LectioError):
    """A record with the same identifier already exists."""


class IoError(LectioError):
    """The underlying storage failed."""


class StaleState(LectioError):
    """A compare-and-swap update observed a different current state."""


class IllegalTransition(LectioError):
    """The requested status transition is not on the lifecycle graph."""


# -- external engines -------------------------------------------------------

class EngineUnavailable(LectioError):
    """The ASR engine endpoint could not be reached."""


class EngineError(LectioError):
    """The ASR engine answered with a failure status."""


class SchemaError(LectioError):
    """The ASR engine's response does not validate against the schema."""


class Timeout(LectioError):
    """The ASR engine did not answer within the configured timeout."""


class ToolMissing(LectioError):
    """A required external conversion tool is not installed."""


class ConversionError(LectioError):
    """Media conversion failed."""
