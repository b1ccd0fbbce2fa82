"""Exception types raised across evdiff.

All of them subclass a builtin so callers that only know ``ValueError`` or
``FloatingPointError`` keep working.
"""


class EventFormatError(ValueError):
    """A malformed event record. ``line_no`` is 1-based."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class NonFiniteError(FloatingPointError):
    """NaN/inf reached during sampling or training."""

    def __init__(self, message, step=None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class RankDeficientError(ValueError):
    pass


class ShapeMismatchError(ValueError):
    pass


class ConfigError(ValueError):
    pass
