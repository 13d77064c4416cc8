"""Monte Carlo coverage of the scaled-trace confidence interval on AR(1) panels.

Seeding: replication ``r`` of grid cell ``c`` draws from the Philox substream
``SeedSequence(master_seed, spawn_key=(c, 0, r))``; run ``k`` of the simulated
truth for cell ``c`` uses ``(c, 1, k)``. Results are therefore independent of
how replications are split across workers.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .covariance import sample_covariance, scaled_trace
from .errors import ConfigurationError
from .longrun import KERNELS, KernelSpec, sigma_tr_sq
from .shrinkage import DegenerateWidthWarning, trace_confidence_interval
from .simulate import (DEFAULT_BURN_IN, DEFAULT_SEED, SimConfig, simulate_ar1_panel,
                       true_scaled_trace_ar1)

FULL_GRID = tuple((n, d) for n in (10, 100, 250) for d in (10, 50, 100, 250, 500))
TRUTH_MODES = ("analytic", "simulated")
UNRELIABLE_CLAMP_RATE = 0.5


@dataclass(frozen=True)
class CoverageConfig:
    grid: tuple = ((10, 10), (100, 50))
    replications: int = 1000
    alpha: float = 0.10
    kernel: str = "truncated"
    lag: Optional[int] = None
    master_seed: int = DEFAULT_SEED
    truth_mode: str = "analytic"
    truth_runs: int = 20000
    shared_innovations: bool = True
    burn_in: int = DEFAULT_BURN_IN
    innovation_scale: float = 1.0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple((int(n), int(d)) for n, d in self.grid))
        if not self.grid:
            raise ConfigurationError("coverage grid is empty")
        for n, d in self.grid:
            if n < 2 or d < 1:
                raise ConfigurationError(f"grid cell (n={n}, d={d}) needs n >= 2, d >= 1")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.kernel not in KERNELS:
            raise ConfigurationError(f"unknown kernel {self.kernel!r}")
        if self.truth_mode not in TRUTH_MODES:
            raise ConfigurationError(f"unknown truth mode {self.truth_mode!r}")
        if self.truth_runs < 1:
            raise ConfigurationError("truth_runs must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def sim_config(self, n: int, d: int) -> SimConfig:
        return SimConfig(n=n, d=d, seed=self.master_seed, burn_in=self.burn_in,
                         shared_innovations=self.shared_innovations,
                         innovation_scale=self.innovation_scale)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["grid"] = [list(c) for c in self.grid]
        out.pop("workers")
        return out


@dataclass(frozen=True)
class CellResult:
    n: int
    d: int
    m: int
    truth: float
    coverage: float
    stderr: float
    mean_width: float
    clamp_rate: float
    replications: int
    reliable: bool = True


@dataclass(frozen=True)
class CoverageReport:
    config: CoverageConfig
    cells: list = field(default_factory=list)

    def cell(self, n: int, d: int) -> CellResult:
        for c in self.cells:
            if (c.n, c.d) == (n, d):
                return c
        raise KeyError((n, d))


def binomial_stderr(p: float, reps: int) -> float:
    return math.sqrt(p * (1.0 - p) / reps)


def _replicate_chunk(args):
    config, cell_index, n, d, truth, reps = args
    sim = config.sim_config(n, d)
    kernel = KernelSpec.for_length(n, config.kernel, config.lag)
    out = np.empty((len(reps), 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWidthWarning)
        for k, r in enumerate(reps):
            panel = simulate_ar1_panel(sim, key=(cell_index, 0, r))
            lrv = sigma_tr_sq(panel, kernel)
            ci = trace_confidence_interval(sample_covariance(panel), lrv, config.alpha)
            out[k] = (ci.covers(truth), 2.0 * ci.half_width, lrv.clamped)
    return out


def _truth_chunk(args):
    config, cell_index, n, d, runs = args
    sim = config.sim_config(n, d)
    return [scaled_trace(sample_covariance(simulate_ar1_panel(sim, key=(cell_index, 1, k))))
            for k in runs]


def _chunks(total: int, parts: int) -> list[range]:
    size = max(1, math.ceil(total / parts))
    return [range(s, min(s + size, total)) for s in range(0, total, size)]


def _map(fn, jobs, workers):
    if workers == 1 or len(jobs) == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cell_truth(config: CoverageConfig, cell_index: int, n: int, d: int) -> float:
    if config.truth_mode == "analytic":
        return true_scaled_trace_ar1(config.sim_config(n, d))
    jobs = [(config, cell_index, n, d, ch) for ch in _chunks(config.truth_runs, 4 * config.workers)]
    values = [v for part in _map(_truth_chunk, jobs, config.workers) for v in part]
    return math.fsum(values) / len(values)


def run_coverage_study(config: CoverageConfig) -> CoverageReport:
    """Estimate interval coverage for every ``(n, d)`` cell of the grid."""
    cells = []
    for ci, (n, d) in enumerate(config.grid):
        truth = cell_truth(config, ci, n, d)
        jobs = [(config, ci, n, d, truth, ch)
                for ch in _chunks(config.replications, 4 * config.workers)]
        res = np.vstack(_map(_replicate_chunk, jobs, config.workers))
        cov = float(res[:, 0].mean())
        clamp_rate = float(res[:, 2].mean())
        cells.append(CellResult(
            n=n, d=d,
            m=KernelSpec.for_length(n, config.kernel, config.lag).m,
            truth=truth,
            coverage=cov,
            stderr=binomial_stderr(cov, config.replications),
            mean_width=math.fsum(res[:, 1].tolist()) / len(res),
            clamp_rate=clamp_rate,
            replications=config.replications,
            reliable=clamp_rate <= UNRELIABLE_CLAMP_RATE,
        ))
    return CoverageReport(config, cells)


def default_workers() -> int:
    return os.cpu_count() or 1
