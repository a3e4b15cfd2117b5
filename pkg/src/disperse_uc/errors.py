"""Exception hierarchy shared by the numerical modules and the CLI."""


class DisperseError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class DomainError(DisperseError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResolutionError(DisperseError):
    """The grid cannot resolve the requested object; carries the needed size."""

    def __init__(self, message: str, required_n: int | None = None):
        super().__init__(message)
        self.required_n = required_n


class FitError(DisperseError):
    """A least-squares fit could not be performed on the given window."""

    def __init__(self, message: str, locations=None):
        super().__init__(message)
        self.locations = [] if locations is None else list(locations)


class NumericalError(DisperseError):
    """Quadrature, root finding or a conditioning check failed."""


class SingularityError(NumericalError):
    """A multiplier denominator is too close to zero on the grid."""

    def __init__(self, message: str, cell=None):
        super().__init__(message)
        self.cell = cell


class ConfigError(DisperseError):
    """An experiment configuration is malformed or incomplete."""
