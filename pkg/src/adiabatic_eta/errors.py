"""Exception hierarchy shared by the numerical modules and the CLI."""


class EtaError(Exception):
    """Base class for all library errors."""


class PoleError(EtaError, ValueError):
    """Raised when a function is evaluated at one of its poles."""


class DomainError(EtaError, ValueError):
    """Raised for arguments outside the documented domain."""


class TruncationError(EtaError, RuntimeError):
    """A series could not be truncated within its term budget."""


class QuadratureError(EtaError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class FitError(EtaError, RuntimeError):
    """A least-squares asymptotic fit was unusable."""


class ContinuationError(EtaError, RuntimeError):
    """Analytic continuation diagnostics failed."""


class ConfigError(EtaError, ValueError):
    """Invalid configuration file or command-line input."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
