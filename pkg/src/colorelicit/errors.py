"""Exception types shared across the package."""


class ColorElicitError(Exception):
    """Base class for all package-specific errors."""


class InvalidCoordinate(ColorElicitError):
    """A color coordinate is non-finite or otherwise unusable."""


class EmptySampleSet(ColorElicitError):
    """An operation that needs at least one sample received none."""


class DegenerateTarget(ColorElicitError):
    """A target distribution cannot be normalized over the color lattice."""


class MalformedAnswer(ColorElicitError):
    """A respondent reply could not be parsed into the expected answer kind."""


class RespondentFailure(ColorElicitError):
    """A respondent gave up (e.g. retries exhausted on malformed replies)."""


class TransportError(ColorElicitError):
    """An HTTP-level failure (connection, timeout, bad status, bad payload).

    Distinct from RespondentFailure so a run supervisor can treat it as
    retryable.
    """


class ReplayDivergence(ColorElicitError):
    """A replayed query does not match the next recorded query."""


class ReplayExhausted(ColorElicitError):
    """The replay log has no more entries."""


class GridMismatch(ColorElicitError):
    """Two histograms do not share the same grid."""


class MissingReference(ColorElicitError):
    """No reference histogram is available for an object."""


class EmptyTrace(ColorElicitError):
    """A diagnostic trace has no entries (e.g. a 1-iteration chain)."""


class ConfigError(ColorElicitError):
    """A run configuration is missing a field or mixes incompatible modes.

    ``field`` holds the dotted path of the offending entry when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class LogError(ColorElicitError):
    """A chain log line could not be parsed.

    ``line_number`` is 1-based; ``partial`` holds the records successfully
    read before the corrupt line.
    """

    def __init__(self, message: str, line_number: int, partial=None):
        super().__init__(message)
        self.line_number = line_number
        self.partial = partial if partial is not None else []
