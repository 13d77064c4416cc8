"""Synthetic panels from causal linear filters of a Gaussian innovation stream.

Randomness
----------
All draws come from ``numpy.random.Philox`` (a counter-based generator) keyed
by ``numpy.random.SeedSequence(seed, spawn_key=key)``. Independent substreams
for parallel work are obtained by extending the spawn key, e.g.
``(cell_index, replication_index)``; no state is shared between substreams.

Standard normal variates are produced by inversion: a uniform double
``u = k * 2**-53 + 2**-54`` (``k`` the 53-bit integer behind
``Generator.random``, so ``u`` is strictly inside (0, 1)) is mapped through
:func:`shrinkcov.normal.normal_quantile`. This makes the Gaussian stream a
function of the uniform stream only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError
from .normal import normal_quantile
from .panel import ReturnsPanel

DEFAULT_SEED = 20180101
DEFAULT_BURN_IN = 200

_HALF_ULP = 2.0 ** -54


def make_generator(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for ``seed`` and substream ``key``."""
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    u = rng.random(shape) + _HALF_ULP
    return normal_quantile(u)


def ar1_rule_rho(d: int) -> np.ndarray:
    """AR coefficients 0.1 + 0.5 * nu / d for nu = 1..d."""
    return 0.1 + 0.5 * np.arange(1, d + 1) / d


@dataclass(frozen=True)
class SimConfig:
    """AR(1) panel design.

    ``rho`` is either ``"paper_ar1"`` or an explicit sequence of ``d``
    coefficients. ``shared_innovations`` drives every coordinate with the same
    innovation stream; turn it off for independent per-coordinate streams.
    ``innovation_scale`` multiplies the innovations (0 gives a zero panel,
    which is only useful for degenerate-case testing).
    """

    n: int
    d: int
    rho: Union[str, Sequence[float]] = "paper_ar1"
    seed: int = DEFAULT_SEED
    burn_in: int = DEFAULT_BURN_IN
    shared_innovations: bool = True
    innovation_dist: str = "standard_normal"
    innovation_scale: float = 1.0

    def __post_init__(self):
        if not isinstance(self.rho, str):
            object.__setattr__(self, "rho", tuple(float(r) for r in self.rho))
        self.validate()

    def validate(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ConfigurationError(f"n and d must be positive, got n={self.n}, d={self.d}")
        if self.burn_in < 0:
            raise ConfigurationError("burn_in must be nonnegative")
        if self.innovation_dist != "standard_normal":
            raise ConfigurationError(f"unknown innovation distribution {self.innovation_dist!r}")
        if not np.isfinite(self.innovation_scale) or self.innovation_scale < 0:
            raise ConfigurationError("innovation_scale must be finite and nonnegative")
        if isinstance(self.rho, str) and self.rho != "paper_ar1":
            raise ConfigurationError(f"unknown rho rule {self.rho!r}")
        rho = self.rhos()
        if rho.shape != (self.d,):
            raise ConfigurationError(f"{rho.size} AR coefficients given for d={self.d}")
        if np.any(~np.isfinite(rho)) or np.any(np.abs(rho) >= 1.0):
            raise ConfigurationError("AR coefficients must satisfy |rho| < 1")

    def rhos(self) -> np.ndarray:
        if isinstance(self.rho, str):
            return ar1_rule_rho(self.d)
        return np.asarray(self.rho, dtype=np.float64)


def draw_innovations(seed: int, length: int, d: int, shared: bool = True,
                     key: Sequence[int] = (), scale: float = 1.0) -> np.ndarray:
    """Innovation block of shape ``(length,)`` if shared else ``(length, d)``."""
    rng = make_generator(seed, *key)
    shape = (length,) if shared else (length, d)
    eps = standard_normal(rng, shape)
    if scale != 1.0:
        eps = eps * scale
    return eps


def simulate_ar1_panel(config: SimConfig, key: Sequence[int] = ()) -> ReturnsPanel:
    """Simulate ``Y_t = rho_nu * Y_{t-1} + eps_t`` from ``Y_0 = 0``.

    The first ``config.burn_in`` values are discarded. ``key`` selects an
    independent substream of ``config.seed``.
    """
    rho = config.rhos()
    total = config.burn_in + config.n
    eps = draw_innovations(config.seed, total, config.d, config.shared_innovations,
                           key, config.innovation_scale)
    out = np.empty((total, config.d))
    for j, r in enumerate(rho):
        src = eps if config.shared_innovations else eps[:, j]
        out[:, j] = lfilter([1.0], [1.0, -r], src)
    return ReturnsPanel(out[config.burn_in:])


@dataclass(frozen=True)
class LinearProcessSpec:
    """Truncated linear process ``Y_t = sum_j c_j eps_{t-j}`` per coordinate.

    ``coeffs`` holds one coefficient sequence per coordinate (they may differ
    in length). ``burn_in`` must be at least the longest filter length minus
    one so that every reported value uses the full filter.
    """

    coeffs: tuple
    n: int
    seed: int = DEFAULT_SEED
    burn_in: int = DEFAULT_BURN_IN
    shared_innovations: bool = True

    def __post_init__(self):
        coeffs = tuple(np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs:
            raise ConfigurationError("linear process needs at least one coordinate")
        for nu, c in enumerate(coeffs):
            if c.ndim != 1 or c.size == 0:
                raise ConfigurationError(f"coordinate {nu}: empty coefficient list")
            if not np.all(np.isfinite(c)) or not np.any(c != 0.0):
                raise ConfigurationError(f"coordinate {nu}: needs a finite, nonzero coefficient")
        if self.n < 1:
            raise ConfigurationError("n must be positive")
        if self.burn_in < self.max_lag:
            raise ConfigurationError(
                f"burn_in={self.burn_in} is shorter than the filter lag {self.max_lag}"
            )

    @property
    def d(self) -> int:
        return len(self.coeffs)

    @property
    def max_lag(self) -> int:
        return max(c.size for c in self.coeffs) - 1


def simulate_linear_process(spec: LinearProcessSpec,
                            innovations: Optional[np.ndarray] = None,
                            key: Sequence[int] = ()) -> ReturnsPanel:
    """Filter an innovation stream through each coordinate's coefficients.

    With ``innovations=None`` the stream is drawn exactly as
    :func:`simulate_ar1_panel` draws it for the same seed, burn-in and key,
    so an AR(1) path and its truncated moving-average form line up.
    An explicit stream must have length ``burn_in + n`` (shape ``(T,)`` when
    shared, ``(T, d)`` otherwise).
    """
    total = spec.burn_in + spec.n
    if innovations is None:
        eps = draw_innovations(spec.seed, total, spec.d, spec.shared_innovations, key)
    else:
        eps = np.asarray(innovations, dtype=np.float64)
        expected = (total,) if spec.shared_innovations else (total, spec.d)
        if eps.shape != expected:
            raise ConfigurationError(f"innovations shape {eps.shape}, expected {expected}")
    out = np.empty((total, spec.d))
    for j, c in enumerate(spec.coeffs):
        src = eps if spec.shared_innovations else eps[:, j]
        out[:, j] = lfilter(c, [1.0], src)
    return ReturnsPanel(out[spec.burn_in:])


def true_scaled_trace_ar1(config: SimConfig) -> float:
    """Stationary scaled trace ``mean(1 / (1 - rho**2))`` times the innovation variance."""
    rho = config.rhos()
    return float(np.mean(1.0 / (1.0 - rho ** 2)) * config.innovation_scale ** 2)
