"""Exception hierarchy shared by all modules."""


class JMatrixError(Exception):
    """Base class for every error raised by the package."""


class DomainError(JMatrixError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(JMatrixError, ValueError):
    """Invalid run configuration."""


class NumericalError(JMatrixError, ArithmeticError):
    """A numerical procedure failed to converge or lost too much precision."""


class MatrixError(NumericalError):
    """Factorization failure or singular system."""


class PoleError(NumericalError):
    """Energy too close to a Harris eigenvalue for the spectral sum."""

    def __init__(self, message, nearest=None, gap=None):
        super().__init__(message)
        self.nearest = nearest
        self.gap = gap


class SineNodeError(NumericalError):
    """The lowest sine coefficient vanishes, so the cosine source is undefined."""


class ConventionError(NumericalError):
    """Closed-form and recursion-propagated coefficients disagree."""


class ConsistencyError(NumericalError):
    """The two forms of the relativistic tangent disagree beyond tolerance."""
