"""Long-run (co)variances of squared series and the scaled-trace variance.

Coordinates are indexed from 0 here. For a panel ``Y`` with columns ``nu`` and
``mu`` the lag-``tau`` cross-covariance of squares is

    gamma(nu, mu; tau) = (1/n) sum_{i < n - tau} (Y[i,nu]**2 - mbar[nu]) * (Y[i+tau,mu]**2 - mbar[mu])

with ``mbar`` the full-sample mean of squares, and the pair estimate is

    beta2(nu, mu) = gamma(nu, mu; 0) + 2 * sum_{tau=1}^{m} w[tau] * gamma(nu, mu; tau).

Only nonnegative lags enter a pair; summing over all ordered pairs makes the
aggregate symmetric. The scaled-trace variance is ``sum(beta2) / d**2``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError, NumericError
from .panel import ReturnsPanel

KERNELS = ("truncated", "bartlett")
SIGMA_FLOOR = 1e-12
# Fixed row-block size of the pair sweep. Must not depend on the worker count.
PAIR_BLOCK = 64


def default_lag_truncation(n: int) -> int:
    """``max(1, floor(n ** 0.3))``."""
    if n < 2:
        raise DataError(f"lag rule needs n >= 2, got {n}")
    m = int(math.floor(n ** 0.3))
    # exact integer correction: largest m with m**10 <= n**3
    while m ** 10 > n ** 3:
        m -= 1
    while (m + 1) ** 10 <= n ** 3:
        m += 1
    return max(1, m)


@dataclass(frozen=True)
class KernelSpec:
    """Lag-weight rule. ``m = 0`` is bumped to 1."""

    kind: str = "truncated"
    m: int = 1

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ConfigurationError(f"unknown kernel {self.kind!r}; choose from {KERNELS}")
        if int(self.m) != self.m or self.m < 0:
            raise ConfigurationError(f"lag truncation must be a nonnegative integer, got {self.m}")
        object.__setattr__(self, "m", max(1, int(self.m)))

    @classmethod
    def for_length(cls, n: int, kind: str = "truncated", m: int | None = None) -> "KernelSpec":
        return cls(kind, default_lag_truncation(n) if m is None else m)

    def weights(self) -> np.ndarray:
        """Weights for lags ``1..m``."""
        tau = np.arange(1, self.m + 1, dtype=np.float64)
        if self.kind == "truncated":
            return np.ones_like(tau)
        return 1.0 - tau / (self.m + 1)

    def check_length(self, n: int) -> None:
        if self.m >= n:
            raise ConfigurationError(f"lag truncation m={self.m} needs m <= n - 1 (n={n})")


@dataclass(frozen=True, eq=False)
class LongRunVariance:
    """Scaled-trace variance estimate with the pair matrix behind it.

    ``sigma_tr_sq_raw`` is the unclamped average of ``beta_sq``; when it is
    not above ``SIGMA_FLOOR`` the reported ``sigma_tr_sq`` is the floor and
    ``clamped`` is set.
    """

    sigma_tr_sq: float
    sigma_tr_sq_raw: float
    beta_sq: np.ndarray
    kernel: KernelSpec
    n: int
    clamped: bool

    @property
    def sigma_tr(self) -> float:
        return math.sqrt(self.sigma_tr_sq)

    @property
    def d(self) -> int:
        return self.beta_sq.shape[0]


def _centered_squares(panel: ReturnsPanel) -> np.ndarray:
    sq = panel.data ** 2
    return sq - sq.mean(axis=0)


def _check_index(panel: ReturnsPanel, *idx: int) -> None:
    for k in idx:
        if not 0 <= k < panel.d:
            raise ConfigurationError(f"coordinate index {k} outside 0..{panel.d - 1}")


def cross_cov_squares(panel: ReturnsPanel, nu: int, mu: int, tau: int) -> float:
    """Lag-``tau`` cross-covariance of the squares of columns ``nu`` and ``mu``."""
    _check_index(panel, nu, mu)
    tau = abs(int(tau))
    if tau >= panel.n:
        raise ConfigurationError(f"lag {tau} out of range for n={panel.n}")
    sq_nu = panel.data[:, nu] ** 2
    sq_mu = panel.data[:, mu] ** 2
    a = sq_nu - sq_nu.mean()
    b = sq_mu - sq_mu.mean()
    n = panel.n
    return float(np.dot(a[: n - tau], b[tau:]) / n)


def beta_hat_sq(panel: ReturnsPanel, nu: int, mu: int, kernel: KernelSpec) -> float:
    """Kernel-weighted long-run covariance of squared columns ``nu`` and ``mu``."""
    _check_index(panel, nu, mu)
    kernel.check_length(panel.n)
    c = _centered_squares(panel)
    a, b = c[:, nu], c[:, mu]
    n = panel.n
    total = np.dot(a, b) / n
    for tau, w in enumerate(kernel.weights(), start=1):
        total += 2.0 * w * np.dot(a[: n - tau], b[tau:]) / n
    return float(total)


def univariate_longrun_variance(panel: ReturnsPanel, nu: int, kernel: KernelSpec) -> float:
    """Long-run variance of one squared series; same as ``beta_hat_sq(nu, nu)``."""
    return beta_hat_sq(panel, nu, nu, kernel)


def _pair_block(c: np.ndarray, rows: slice, weights: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    left = c[:, rows]
    out = left.T @ c
    for tau, w in enumerate(weights, start=1):
        out += (2.0 * w) * (left[: n - tau].T @ c[tau:])
    return out / n


def pair_matrix(panel: ReturnsPanel, kernel: KernelSpec, workers: int = 1) -> np.ndarray:
    """All ordered-pair estimates ``beta2(nu, mu)`` as a ``d x d`` array.

    Rows are processed in fixed blocks of ``PAIR_BLOCK`` coordinates; each
    block writes its own slot, so the result does not depend on ``workers``.
    """
    panel.require_rows(2)
    kernel.check_length(panel.n)
    if workers < 1:
        raise ConfigurationError("workers must be >= 1")
    with np.errstate(over="ignore", invalid="ignore"):
        c = _centered_squares(panel)
    weights = kernel.weights()
    d = panel.d
    blocks = [slice(s, min(s + PAIR_BLOCK, d)) for s in range(0, d, PAIR_BLOCK)]
    beta = np.empty((d, d))

    def run(blk: slice) -> None:
        with np.errstate(over="ignore", invalid="ignore"):
            beta[blk] = _pair_block(c, blk, weights)

    if workers == 1 or len(blocks) == 1:
        for blk in blocks:
            run(blk)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, blocks))

    bad = ~np.isfinite(beta)
    if bad.any():
        nu, mu = np.argwhere(bad)[0]
        raise NumericError(f"non-finite long-run covariance at pair ({nu}, {mu})")
    return beta


def pair_diagonal(panel: ReturnsPanel, kernel: KernelSpec) -> np.ndarray:
    """Only the diagonal ``beta2(nu, nu)`` of :func:`pair_matrix`, in O(n d m)."""
    panel.require_rows(2)
    kernel.check_length(panel.n)
    c = _centered_squares(panel)
    n = panel.n
    out = np.einsum("ij,ij->j", c, c)
    for tau, w in enumerate(kernel.weights(), start=1):
        out += 2.0 * w * np.einsum("ij,ij->j", c[: n - tau], c[tau:])
    return out / n


def aggregate(beta: np.ndarray) -> float:
    """``sum(beta) / d**2`` with an exactly rounded, order-independent sum."""
    d = beta.shape[0]
    return math.fsum(beta.ravel().tolist()) / (d * d)


def sigma_tr_sq(panel: ReturnsPanel, kernel: KernelSpec | None = None,
                workers: int = 1) -> LongRunVariance:
    """Estimate the long-run variance of the scaled trace.

    ``kernel`` defaults to the truncated kernel with ``m = floor(n**0.3)``.
    """
    if kernel is None:
        kernel = KernelSpec.for_length(panel.n)
    beta = pair_matrix(panel, kernel, workers)
    raw = aggregate(beta)
    clamped = not raw > SIGMA_FLOOR
    beta.flags.writeable = False
    return LongRunVariance(
        sigma_tr_sq=SIGMA_FLOOR if clamped else raw,
        sigma_tr_sq_raw=raw,
        beta_sq=beta,
        kernel=kernel,
        n=panel.n,
        clamped=clamped,
    )
