"""Exception hierarchy shared across the package."""


class LassoZeroError(Exception):
    """Base class for all package-specific failures."""


class ConstantColumn(LassoZeroError):
    """Raised when a column cannot be standardized (sd below tolerance)."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} is constant (sd <= 1e-12)")


class CsvFormatError(LassoZeroError):
    """Raised when a CSV design/response file cannot be parsed."""


class Infeasible(LassoZeroError):
    """The equality constraints admit no solution within feas_tol."""


class NotConverged(LassoZeroError):
    """The solver hit its iteration cap or ran into numerical trouble."""

    def __init__(self, message: str, iterations: int | None = None):
        self.iterations = iterations
        super().__init__(message)


class DegenerateNoiseFit(LassoZeroError):
    """Fewer than two nonzero noise coefficients, or zero spread among them."""


class FitFailed(LassoZeroError):
    """Maximum-likelihood fit did not converge to a valid optimum."""


class EnumerationTooLarge(LassoZeroError):
    """An exact enumeration oracle was asked to exceed its size bounds."""


class SingularGram(LassoZeroError):
    """The Gram matrix of the support columns is numerically singular."""


class NotFound(LassoZeroError):
    """Exhaustive search found no exact sparse solution within the bound."""


class CalibrationError(LassoZeroError):
    """Too many Monte Carlo replications failed to produce a statistic."""
