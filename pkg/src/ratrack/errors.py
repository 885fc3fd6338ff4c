"""Exception hierarchy shared across the pipeline."""


class RatrackError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(RatrackError):
    """Invalid configuration (bad parameter values, inconsistent dims)."""


class FrameError(RatrackError):
    """Frame/grid dimension or length mismatch."""


class StreamError(RatrackError):
    """Violation of a streaming contract (dims changed mid-stream,
    non-monotone timestamps)."""


class FormatError(RatrackError):
    """Malformed or truncated tensor file.

    Carries the byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SingularGeometryError(RatrackError):
    """Measurement model evaluated at a singular state (target at origin)."""


class NumericalError(RatrackError):
    """A linear-algebra step failed (e.g. non-invertible innovation covariance)."""
