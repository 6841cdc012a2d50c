"""Exception types raised by wonham_lab."""


class WonhamLabError(Exception):
    """Base class for all package errors."""


class NonErgodicError(WonhamLabError):
    """The generator does not describe an ergodic chain."""


class DegenerateObservationError(WonhamLabError):
    """Two-state closed forms need h_1 != h_2."""


class DomainError(WonhamLabError, ValueError):
    pass


class InsufficientHorizonError(WonhamLabError, ValueError):
    """The estimation window after burn-in is empty or too short."""


class DegenerateRunError(WonhamLabError):
    """The two filters coincide, so no distance or wedge rate exists."""


class NotApplicableError(WonhamLabError):
    pass


class ConfigError(WonhamLabError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
