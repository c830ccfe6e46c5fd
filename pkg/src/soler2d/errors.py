"""Exception types raised by soler2d."""


class Soler2DError(Exception):
    """Base class for all package errors."""


class DomainError(Soler2DError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class CoverageError(DomainError):
    """A requested time or hyperbolic time is not covered by a history."""


class ConfigError(Soler2DError, ValueError):
    """Invalid run configuration, detected before any compute."""


class BlowUpError(Soler2DError, RuntimeError):
    """The discrete solution left the small-data regime (or became non-finite)."""

    def __init__(self, message, t=None, sup=None, threshold=None):
        super().__init__(message)
        self.t = t
        self.sup = sup
        self.threshold = threshold


class SupportViolation(Soler2DError, RuntimeError):
    """Field mass appeared far outside the light cone (periodic wrap-around)."""

    def __init__(self, message, t=None, leak=None):
        super().__init__(message)
        self.t = t
        self.leak = leak
