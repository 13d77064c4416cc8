"""Sample covariance, trace functionals and Frobenius projections."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, DataError
from .panel import ReturnsPanel

CENTERING_MODES = ("none", "mean")
SYMMETRY_TOL = 1e-10


def _mirror_lower(a: np.ndarray) -> np.ndarray:
    low = np.tril(a)
    return low + np.tril(a, -1).T


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Symmetric ``d x d`` covariance estimate with its sample size and centering."""

    values: np.ndarray
    n: int
    centering: str = "none"

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise DataError(f"covariance must be square, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DataError("covariance has non-finite entries")
        check_symmetric(vals)
        if np.any(np.diag(vals) < 0):
            raise DataError("covariance has a negative diagonal entry")
        vals = _mirror_lower(vals)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.centering not in CENTERING_MODES:
            raise ConfigurationError(f"unknown centering {self.centering!r}")

    @property
    def d(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class DiagTarget:
    """Diagonal of a covariance matrix, i.e. its projection onto diagonal matrices."""

    diag: np.ndarray

    def __post_init__(self):
        v = np.array(self.diag, dtype=np.float64, copy=True)
        if v.ndim != 1:
            raise DataError("diagonal target must be a vector")
        if np.any(v < 0):
            raise DataError("diagonal target has negative entries")
        v.flags.writeable = False
        object.__setattr__(self, "diag", v)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


MatrixLike = Union[CovMatrix, np.ndarray]


def _values(a: MatrixLike) -> np.ndarray:
    return a.values if isinstance(a, CovMatrix) else np.asarray(a, dtype=np.float64)


def check_symmetric(a: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > tol * scale:
        raise DataError("matrix is not symmetric within tolerance")


def sample_covariance(panel: ReturnsPanel, centering: str = "none") -> CovMatrix:
    """``(1/n) sum_i Y_i Y_i'``, or the same around the column means.

    ``centering="none"`` is the zero-mean form used by all the variance
    formulas in this package; ``"mean"`` subtracts column means first.
    """
    if centering not in CENTERING_MODES:
        raise ConfigurationError(f"unknown centering {centering!r}")
    panel.require_rows(2)
    x = panel.data
    if centering == "mean":
        x = x - x.mean(axis=0)
    s = (x.T @ x) / panel.n
    return CovMatrix(_mirror_lower(s), panel.n, centering)


def trace(cov: MatrixLike) -> float:
    return float(np.trace(_values(cov)))


def scaled_trace(cov: MatrixLike) -> float:
    """Trace divided by the dimension, so the identity scores 1 in any dimension."""
    a = _values(cov)
    return trace(a) / a.shape[0]


def diagonal_target(cov: MatrixLike) -> DiagTarget:
    return DiagTarget(np.diag(_values(cov)).copy())


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> float:
    """``tr(A'B)``."""
    return float(np.sum(a * b))


def project_onto_span(a, b) -> np.ndarray:
    """Closest multiple of ``b`` to ``a`` in Frobenius norm: ``(A,B)/(B,B) * B``."""
    a = _values(a)
    b = _values(b)
    if a.shape != b.shape:
        raise ConfigurationError(f"shape mismatch {a.shape} vs {b.shape}")
    bb = frobenius_inner(b, b)
    if bb == 0.0:
        raise ConfigurationError("cannot project onto the span of a zero matrix")
    return (frobenius_inner(a, b) / bb) * b


def eigenvalues(cov: MatrixLike) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, largest first."""
    a = _values(cov)
    check_symmetric(a)
    return np.linalg.eigvalsh(_mirror_lower(a))[::-1]


def condition_number(cov: MatrixLike) -> float:
    """Largest over smallest eigenvalue; ``inf`` if the smallest is not positive."""
    lam = eigenvalues(cov)
    if lam[-1] <= 0.0:
        return float("inf")
    return float(lam[0] / lam[-1])
