"""Exception types shared across the package."""


class GeoapError(Exception):
    """Base class for package-specific failures."""


class DataFormatError(GeoapError):
    """Raised when an input file violates its expected grammar.

    Carries enough context (path, line number) in the message to locate
    the offending line.
    """

    def __init__(self, message, path=None, line=None):
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class DivergenceError(GeoapError):
    """Raised when message values overflow or turn into NaN during a run."""


class NonConvergenceError(GeoapError):
    """Raised when a run terminates without a usable exemplar set."""


class CalibrationError(GeoapError):
    """Raised when preference calibration cannot reach the requested
    cluster count.

    ``closest_k`` records the nearest cluster count that was achieved by
    any probe run, or ``None`` when no probe completed at all;
    ``closest_preference`` and ``closest_result`` hold the probe that
    achieved it, so callers may fall back to the nearest operating point
    when an exact cluster count is unattainable.
    """

    def __init__(self, message, closest_k=None, closest_preference=None, closest_result=None):
        super().__init__(message)
        self.closest_k = closest_k
        self.closest_preference = closest_preference
        self.closest_result = closest_result
