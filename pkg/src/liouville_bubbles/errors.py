"""Exception hierarchy shared by the numerical modules and the CLI."""


class BubbleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(BubbleError, ValueError):
    """Invalid user input (domain, coefficient, parameters, config file)."""


class DomainError(ConfigurationError):
    """Degenerate domain or a point/ball that does not fit inside it."""


class ResolutionError(ConfigurationError):
    """Bubble core not resolved by the grid (core width below 4h)."""


class NumericalError(BubbleError, RuntimeError):
    """A solver failed: non-convergence, singular system, divergence."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
