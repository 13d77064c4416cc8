"""Minimum-variance portfolios from shrinkage estimates, with risk bounds."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .covariance import condition_number, sample_covariance
from .errors import ConfigurationError, NumericError
from .longrun import KernelSpec, LongRunVariance, sigma_tr_sq
from .normal import normal_quantile
from .panel import ReturnsPanel
from .shrinkage import ShrinkageEstimate, shrink_to_identity

logger = logging.getLogger(__name__)

# Two-sided 99% convention used for the risk bounds by default.
DEFAULT_RISK_P = 0.995
# The literal level printed next to the risk-bound formula. It gives a negative
# quantile and swaps the bounds; accepted only as an explicit override.
LITERAL_RISK_P = 1 - 0.995


@dataclass(frozen=True, eq=False)
class PortfolioWeights:
    w: np.ndarray
    gross_exposure: float
    sum_check: float

    @classmethod
    def from_vector(cls, w) -> "PortfolioWeights":
        w = np.asarray(w, dtype=np.float64).copy()
        w.flags.writeable = False
        return cls(w, float(np.abs(w).sum()), float(w.sum()))


def _matrix(est: Union[ShrinkageEstimate, np.ndarray]) -> np.ndarray:
    return est.matrix if isinstance(est, ShrinkageEstimate) else np.asarray(est, dtype=np.float64)


def min_variance_weights(est: Union[ShrinkageEstimate, np.ndarray]) -> PortfolioWeights:
    """``S^{-1} 1 / (1' S^{-1} 1)`` via a Cholesky solve.

    Raises NumericError if the matrix is not positive definite; shrinking
    with ``W > 0`` toward the identity avoids that.
    """
    s = _matrix(est)
    try:
        factor = cho_factor(s, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise NumericError(
            "covariance estimate is not positive definite; use a shrinkage weight W > 0"
        ) from exc
    x = cho_solve(factor, np.ones(s.shape[0]))
    total = x.sum()
    if not np.isfinite(total) or total <= 0:
        raise NumericError("degenerate minimum-variance solve")
    return PortfolioWeights.from_vector(x / total)


@dataclass(frozen=True)
class RiskBounds:
    risk: float
    lower: float
    upper: float
    clamped_lower: bool
    p_level: float


def portfolio_risk_bounds(est: ShrinkageEstimate, w: Union[PortfolioWeights, np.ndarray],
                          lrv: LongRunVariance, p: float = DEFAULT_RISK_P) -> RiskBounds:
    """Risk ``sqrt(w' S w)`` and ``sqrt(w' S w -/+ z_p sigma_tr / sqrt(n) ||w||^2)``.

    A negative radicand in the lower bound is replaced by 0 and flagged.
    """
    vec = w.w if isinstance(w, PortfolioWeights) else np.asarray(w, dtype=np.float64)
    if vec.shape != (est.d,):
        raise ConfigurationError(f"weight vector shape {vec.shape}, expected ({est.d},)")
    if lrv.n != est.n:
        raise ConfigurationError(f"long-run variance from n={lrv.n}, estimate from n={est.n}")
    var = float(vec @ est.matrix @ vec)
    delta = normal_quantile(p) * math.sqrt(lrv.sigma_tr_sq / est.n) * float(vec @ vec)
    lo_rad = var - delta
    hi_rad = var + delta
    clamped = lo_rad < 0
    return RiskBounds(
        risk=math.sqrt(max(var, 0.0)),
        lower=0.0 if clamped else math.sqrt(lo_rad),
        upper=math.sqrt(max(hi_rad, 0.0)),
        clamped_lower=clamped,
        p_level=float(p),
    )


@dataclass(frozen=True, eq=False)
class PeriodResult:
    period: int
    start: int
    stop: int
    weights: PortfolioWeights
    bounds: RiskBounds
    cond_raw: float
    cond_shrunk: float
    sigma_tr_sq: float
    lrv_clamped: bool


@dataclass(frozen=True, eq=False)
class RollingStudy:
    periods: list[PeriodResult]
    skipped: list[int] = field(default_factory=list)
    discarded_rows: int = 0


def rolling_portfolio_study(panel: ReturnsPanel, window: int, W: float = 0.2,
                            alpha: float = 0.01, kernel: str = "truncated",
                            lag: Optional[int] = None, workers: int = 1) -> RollingStudy:
    """Min-variance portfolio and risk bounds on consecutive non-overlapping windows.

    Each window uses the zero-mean sample covariance, identity-target
    shrinkage with weight ``W`` and risk bounds at ``p = 1 - alpha/2``.
    Rows after the last full window are dropped.
    """
    if window < 2 or window > panel.n:
        raise ConfigurationError(f"window must lie in [2, n={panel.n}], got {window}")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    spec = KernelSpec.for_length(window, kernel, lag)
    p = 1.0 - alpha / 2.0
    count = panel.n // window
    periods, skipped = [], []
    for k in range(count):
        start, stop = k * window, (k + 1) * window
        sub = panel.rows(start, stop)
        cov = sample_covariance(sub, "none")
        est = shrink_to_identity(cov, W)
        try:
            weights = min_variance_weights(est)
        except NumericError as exc:
            logger.warning("period %d (rows %d-%d) skipped: %s", k, start, stop, exc)
            skipped.append(k)
            continue
        lrv = sigma_tr_sq(sub, spec, workers)
        periods.append(PeriodResult(
            period=k,
            start=start,
            stop=stop,
            weights=weights,
            bounds=portfolio_risk_bounds(est, weights, lrv, p),
            cond_raw=condition_number(cov),
            cond_shrunk=condition_number(est.matrix),
            sigma_tr_sq=lrv.sigma_tr_sq,
            lrv_clamped=lrv.clamped,
        ))
    return RollingStudy(periods, skipped, panel.n - count * window)
