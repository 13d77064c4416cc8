"""Linear shrinkage toward the identity or the diagonal, with trace-based bounds.

The identity-target estimator is ``(1 - W) S + W tr*(S) I``; replacing
``tr*(S)`` by the endpoints of its asymptotic confidence interval gives the
lower and upper matrix bounds, which differ from the estimator only by a
multiple of the identity.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .covariance import CovMatrix, sample_covariance, scaled_trace
from .errors import ConfigurationError, DataError
from .longrun import KernelSpec, LongRunVariance, pair_diagonal, pair_matrix
from .normal import normal_quantile
from .panel import ReturnsPanel

TARGETS = ("identity", "diagonal")


class DegenerateWidthWarning(UserWarning):
    """The long-run variance was clamped, so interval widths have collapsed."""


def _check_weight(W: float) -> float:
    W = float(W)
    if not 0.0 <= W <= 1.0:
        raise ConfigurationError(f"shrinkage weight must lie in [0, 1], got {W}")
    return W


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class ShrinkageEstimate:
    matrix: np.ndarray
    W: float
    target: str
    scaled_trace: float
    n: int
    cov: CovMatrix

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def shrink_to_identity(cov: CovMatrix, W: float) -> ShrinkageEstimate:
    """``(1 - W) * cov + W * tr*(cov) * I``."""
    W = _check_weight(W)
    mu = scaled_trace(cov)
    m = (1.0 - W) * cov.values
    m[np.diag_indices_from(m)] += W * mu
    m.flags.writeable = False
    return ShrinkageEstimate(m, W, "identity", mu, cov.n, cov)


def shrink_to_diagonal(cov: CovMatrix, W: float) -> ShrinkageEstimate:
    """``(1 - W) * cov + W * diag(cov)``: off-diagonals scaled, diagonal kept exactly."""
    W = _check_weight(W)
    m = (1.0 - W) * cov.values
    np.fill_diagonal(m, np.diag(cov.values))
    m.flags.writeable = False
    return ShrinkageEstimate(m, W, "diagonal", scaled_trace(cov), cov.n, cov)


@dataclass(frozen=True)
class TraceInterval:
    center: float
    half_width: float
    alpha: float
    sigma_tr: float
    n: int
    degenerate: bool = False

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _se(lrv: LongRunVariance, n: int) -> float:
    if lrv.sigma_tr_sq < 0:
        raise DataError("long-run variance must be nonnegative")
    if lrv.n != n:
        raise ConfigurationError(f"long-run variance from n={lrv.n}, covariance from n={n}")
    return math.sqrt(lrv.sigma_tr_sq) / math.sqrt(n)


def _warn_if_clamped(lrv: LongRunVariance) -> bool:
    if lrv.clamped:
        warnings.warn(
            f"long-run variance clamped to the floor (raw value {lrv.sigma_tr_sq_raw:.3g}); "
            "interval width is degenerate",
            DegenerateWidthWarning,
            stacklevel=3,
        )
    return lrv.clamped


def trace_confidence_interval(cov: CovMatrix, lrv: LongRunVariance,
                              alpha: float = 0.10) -> TraceInterval:
    """Asymptotic ``1 - alpha`` interval for the scaled trace:
    ``tr*(S) +/- z_{1-alpha/2} * sigma_tr / sqrt(n)``."""
    alpha = _check_alpha(alpha)
    se = _se(lrv, cov.n)
    z = normal_quantile(1.0 - alpha / 2.0)
    return TraceInterval(
        center=scaled_trace(cov),
        half_width=z * se,
        alpha=alpha,
        sigma_tr=math.sqrt(lrv.sigma_tr_sq),
        n=cov.n,
        degenerate=_warn_if_clamped(lrv),
    )


@dataclass(frozen=True, eq=False)
class MatrixBounds:
    lower: np.ndarray
    upper: np.ndarray
    shift: float
    degenerate: bool = False


def shrinkage_bounds(est: ShrinkageEstimate, lrv: LongRunVariance,
                     alpha: float = 0.01) -> MatrixBounds:
    """Estimator shifted by ``-/+ W * z_{1-alpha/2} * sigma_tr / sqrt(n)`` on the diagonal."""
    if est.target != "identity":
        raise ConfigurationError("matrix bounds are only defined for the identity target")
    alpha = _check_alpha(alpha)
    shift = est.W * normal_quantile(1.0 - alpha / 2.0) * _se(lrv, est.n)
    idx = np.diag_indices(est.d)
    lower = est.matrix.copy()
    upper = est.matrix.copy()
    lower[idx] -= shift
    upper[idx] += shift
    return MatrixBounds(lower, upper, shift, _warn_if_clamped(lrv))


class ProjectionBounds(NamedTuple):
    lower: float
    upper: float
    point: float


def projection_variance_bounds(est: ShrinkageEstimate, w, lrv: LongRunVariance,
                               p: float) -> ProjectionBounds:
    """Bounds on ``w' S_shrunk w`` of ``-/+ z_p * sigma_tr / sqrt(n) * ||w||_2^2``.

    Use ``p = 1 - alpha/2`` for a two-sided pair, ``1 - alpha`` for one bound.
    The lower value is not clamped.
    """
    if est.target != "identity":
        raise ConfigurationError("projection bounds are only defined for the identity target")
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (est.d,):
        raise ConfigurationError(f"weight vector shape {w.shape}, expected ({est.d},)")
    if not np.all(np.isfinite(w)):
        raise DataError("weight vector has non-finite entries")
    point = float(w @ est.matrix @ w)
    delta = normal_quantile(p) * _se(lrv, est.n) * float(w @ w)
    return ProjectionBounds(point - delta, point + delta, point)


def diag_estimator_covariance(panel: ReturnsPanel, kernel: KernelSpec | None = None,
                              workers: int = 1, psd: bool = False) -> np.ndarray:
    """Approximate covariance of ``sqrt(n/d) * (s2_nu - sigma2_nu)``: ``beta2 / d``.

    The raw matrix need not be symmetric. With ``psd=True`` it is symmetrized
    and its negative eigenvalues are set to zero.
    """
    if kernel is None:
        kernel = KernelSpec.for_length(panel.n)
    c = pair_matrix(panel, kernel, workers) / panel.d
    if not psd:
        return c
    sym = 0.5 * (c + c.T)
    lam, vec = np.linalg.eigh(sym)
    return (vec * np.clip(lam, 0.0, None)) @ vec.T


@dataclass(frozen=True)
class MarginalInterval:
    center: float
    half_width: float
    clamped: bool

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width


def diag_marginal_intervals(panel: ReturnsPanel, kernel: KernelSpec | None = None,
                            alpha: float = 0.10) -> list[MarginalInterval]:
    """Per-coordinate intervals ``s2_nu +/- z_{1-alpha/2} sqrt(beta2(nu,nu) / n)``.

    A negative ``beta2(nu, nu)`` is treated as zero and flagged.
    """
    alpha = _check_alpha(alpha)
    if kernel is None:
        kernel = KernelSpec.for_length(panel.n)
    z = normal_quantile(1.0 - alpha / 2.0)
    s2 = np.diag(sample_covariance(panel).values)
    beta = pair_diagonal(panel, kernel)
    out = []
    for center, b in zip(s2, beta):
        clamped = bool(b < 0)
        hw = 0.0 if clamped else z * math.sqrt(b / panel.n)
        out.append(MarginalInterval(float(center), hw, clamped))
    return out
