"""Exception hierarchy.

Every numerical failure derives from :class:`NumericalError` so that the
command line front end can map it to exit code 1; configuration problems
derive from :class:`ConfigError` (exit code 2).
"""


class NumericalError(RuntimeError):
    pass


class PoleError(NumericalError):
    """|1 - r1 r2| vanishes: the lossless resonance pole was hit."""

    def __init__(self, message, family=None):
        super().__init__(message)
        self.family = family


class FitError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class PropagationError(NumericalError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class WindowError(NumericalError):
    """A correlator has not decayed inside its time window."""


class RangeError(NumericalError):
    pass


class DegenerateError(NumericalError, ZeroDivisionError):
    pass


class ConfigError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class TruncationError(ValueError):
    pass
