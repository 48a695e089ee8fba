"""Exception hierarchy shared by the numerical modules and the CLI."""


class LLGError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(LLGError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 2


class InputError(LLGError, ValueError):
    """Malformed or non-finite input data."""

    exit_code = 2


class ConfigError(LLGError, ValueError):
    exit_code = 2


class PoleProximityError(LLGError, ValueError):
    """A spin sample is too close to the South Pole for stereographic projection."""

    exit_code = 4

    def __init__(self, message, x=None, t=None):
        super().__init__(message)
        self.x = x
        self.t = t


class IntegrationError(LLGError, RuntimeError):
    exit_code = 3


class BlowUpError(LLGError, RuntimeError):
    """Raised when a time march produces NaN or an exploding sup norm."""

    exit_code = 4

    def __init__(self, message, last_time=None, state=None):
        super().__init__(message)
        self.last_time = last_time
        self.state = state


class BracketError(LLGError, ValueError):
    exit_code = 5


class CoverageError(LLGError, ValueError):
    """A trajectory does not sample the time interval a quadrature needs."""

    exit_code = 2


class UnsupportedError(LLGError, NotImplementedError):
    exit_code = 2
