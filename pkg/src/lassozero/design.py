"""Design matrices, standardization and the simulated ground truth.

All matrices are dense float64 with rows as observations. Standardization
uses the n-1 divisor for the column standard deviation, and the recorded
(mean, scale) pairs allow mapping coefficients back to the original scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantColumn, CsvFormatError

_SD_FLOOR = 1e-12


def _as_float_matrix(values) -> np.ndarray:
    a = np.ascontiguousarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("design matrix must be 2-dimensional")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("design matrix must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise ValueError("design matrix contains non-finite entries")
    return a


def as_response(y, n: int | None = None) -> np.ndarray:
    """Validate a response vector, optionally against an expected length."""
    v = np.ascontiguousarray(y, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("response contains non-finite entries")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"response length {v.shape[0]} does not match n={n}")
    return v


@dataclass(frozen=True)
class DesignMatrix:
    """An n-by-p regressor matrix plus its standardization metadata.

    ``column_mean``/``column_scale`` record the transformation applied by
    :func:`standardize` (None when the values are raw). Instances are
    treated as immutable; never write into ``values`` after construction.
    """

    values: np.ndarray
    column_mean: np.ndarray | None = None
    column_scale: np.ndarray | None = None
    standardized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", _as_float_matrix(self.values))
        if self.standardized:
            mean = self.values.mean(axis=0)
            sd = self.values.std(axis=0, ddof=1)
            if np.max(np.abs(mean)) > 1e-10 or np.max(np.abs(sd - 1.0)) > 1e-10:
                raise ValueError("standardized flag set but columns are not standardized")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def original_scale_coefficients(self, beta: np.ndarray) -> tuple[np.ndarray, float]:
        """Map coefficients for the standardized columns back to raw columns.

        Returns ``(beta_raw, intercept)`` such that
        ``values_std @ beta == raw @ beta_raw + intercept`` row-wise.
        """
        beta = np.asarray(beta, dtype=np.float64)
        if self.column_scale is None or self.column_mean is None:
            return beta.copy(), 0.0
        beta_raw = beta / self.column_scale
        intercept = -float(np.dot(beta_raw, self.column_mean))
        return beta_raw, intercept


@dataclass(frozen=True)
class GroundTruth:
    """The simulated coefficient vector, its support and the noise level."""

    beta0: np.ndarray
    support: frozenset[int] = field(default=None)  # type: ignore[assignment]
    sigma: float = 1.0

    def __post_init__(self):
        beta0 = np.ascontiguousarray(self.beta0, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "beta0", beta0)
        nz = frozenset(int(j) for j in np.flatnonzero(beta0))
        if self.support is None:
            object.__setattr__(self, "support", nz)
        elif frozenset(int(j) for j in self.support) != nz:
            raise ValueError("support does not match the nonzeros of beta0")
        else:
            object.__setattr__(self, "support", nz)
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def p(self) -> int:
        return self.beta0.shape[0]


def standardize(X: DesignMatrix | np.ndarray) -> DesignMatrix:
    """Center every column to mean 0 and scale to sd 1 (n-1 divisor).

    Raises :class:`ConstantColumn` for any column with sd below 1e-12.
    Idempotent on the values: standardizing twice changes nothing.
    """
    values = X.values if isinstance(X, DesignMatrix) else _as_float_matrix(X)
    if values.shape[0] < 2:
        raise ValueError("standardization needs at least two rows")
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1)
    small = np.flatnonzero(sd <= _SD_FLOOR)
    if small.size:
        raise ConstantColumn(int(small[0]))
    out = (values - mean) / sd
    return DesignMatrix(out, column_mean=mean, column_scale=sd, standardized=True)


def mean_center_projection(
    X: DesignMatrix | np.ndarray, y: np.ndarray
) -> tuple[DesignMatrix, np.ndarray]:
    """Project the design and response onto the orthocomplement of constants.

    Subtracts the column means of X and the mean of y. No scaling metadata
    is recorded: the output is deliberately left unstandardized.
    """
    values = X.values if isinstance(X, DesignMatrix) else _as_float_matrix(X)
    if values.shape[0] < 2:
        raise ValueError("mean centering needs at least two rows")
    yv = as_response(y, values.shape[0])
    Xc = values - values.mean(axis=0)
    yc = yv - yv.mean()
    return DesignMatrix(Xc), yc


def load_design_csv(path: str, skip_header: bool = False) -> DesignMatrix:
    """Read a plain numeric CSV (rows = observations) into a raw design."""
    try:
        values = np.loadtxt(path, delimiter=",", skiprows=1 if skip_header else 0, ndmin=2)
    except OSError:
        raise
    except Exception as exc:
        raise CsvFormatError(f"cannot parse design CSV {path!r}: {exc}") from exc
    try:
        return DesignMatrix(values)
    except ValueError as exc:
        raise CsvFormatError(f"invalid design CSV {path!r}: {exc}") from exc


def load_response_csv(path: str, skip_header: bool = False) -> np.ndarray:
    """Read a single-column numeric CSV into a response vector."""
    try:
        values = np.loadtxt(path, delimiter=",", skiprows=1 if skip_header else 0)
    except OSError:
        raise
    except Exception as exc:
        raise CsvFormatError(f"cannot parse response CSV {path!r}: {exc}") from exc
    values = np.atleast_1d(values)
    if values.ndim != 1:
        raise CsvFormatError(f"response CSV {path!r} must have a single column")
    return as_response(values)
