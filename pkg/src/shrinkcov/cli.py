"""``shrinkcov`` command line: estimate, bounds, portfolio, coverage, simulate.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.
Clamping warnings are reported inside the output and never change the code.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from importlib import resources
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .coverage import CoverageConfig, CoverageReport, run_coverage_study
from .covariance import CENTERING_MODES, condition_number, eigenvalues, sample_covariance
from .errors import ConfigurationError, DataError, ShrinkcovError
from .ingest import IngestOptions, load_returns_csv
from .longrun import KERNELS, KernelSpec, sigma_tr_sq
from .panel import ReturnsPanel
from .portfolio import rolling_portfolio_study
from .shrinkage import DegenerateWidthWarning, shrink_to_identity, shrinkage_bounds, \
    trace_confidence_interval
from .simulate import DEFAULT_SEED, SimConfig, simulate_ar1_panel

SCHEMA_VERSION = "1.0"
FORMATS = ("json", "csv")
COVERAGE_COLUMNS = ("n", "d", "coverage", "stderr", "mean_width", "clamp_rate")
PORTFOLIO_COLUMNS = ("period", "risk", "lower", "upper", "clamped", "cond_raw",
                     "cond_shrunk", "gross_exposure")

logger = logging.getLogger("shrinkcov")


@dataclass(frozen=True)
class RunConfig:
    W: float = 0.2
    alpha: float = 0.10
    kernel: str = "truncated"
    lag: Optional[int] = None
    centering: str = "none"
    threads: int = 1
    seed: int = DEFAULT_SEED
    output_format: str = "json"

    def __post_init__(self):
        if not 0.0 <= self.W <= 1.0:
            raise ConfigurationError(f"weight must lie in [0, 1], got {self.W}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.kernel not in KERNELS:
            raise ConfigurationError(f"unknown kernel {self.kernel!r}")
        if self.lag is not None and self.lag < 1:
            raise ConfigurationError("lag must be >= 1")
        if self.centering not in CENTERING_MODES:
            raise ConfigurationError(f"unknown centering {self.centering!r}")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        if self.output_format not in FORMATS:
            raise ConfigurationError(f"unknown format {self.output_format!r}")

    def echo(self) -> dict:
        # thread count and format are excluded so output is identical across them
        out = asdict(self)
        out.pop("threads")
        out.pop("output_format")
        return out

    def kernel_for(self, n: int) -> KernelSpec:
        return KernelSpec.for_length(n, self.kernel, self.lag)


def _finite_or_none(x: float) -> Optional[float]:
    return float(x) if math.isfinite(x) else None


def load_schema(command: str) -> dict:
    """JSON schema shipped for a report type (estimate, bounds, portfolio, coverage)."""
    ref = resources.files("shrinkcov") / "schemas" / f"{command}-{SCHEMA_VERSION}.json"
    return json.loads(ref.read_text())


def envelope(command: str, config: dict, results) -> dict:
    return {"version": SCHEMA_VERSION, "config": {"command": command, **config},
            "results": results}


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def dumps_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else repr(row[c]) if isinstance(row[c], float)
                         else row[c] for c in columns])
    return buf.getvalue()


def cmd_estimate(panel: ReturnsPanel, cfg: RunConfig) -> dict:
    """Scaled trace, its long-run standard deviation and the confidence interval."""
    cov = sample_covariance(panel, cfg.centering)
    kernel = cfg.kernel_for(panel.n)
    lrv = sigma_tr_sq(panel, kernel, cfg.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWidthWarning)
        ci = trace_confidence_interval(cov, lrv, cfg.alpha)
    results = {
        "n": panel.n,
        "d": panel.d,
        "m": kernel.m,
        "kernel": kernel.kind,
        "scaled_trace": ci.center,
        "sigma_tr_sq": lrv.sigma_tr_sq,
        "sigma_tr_sq_raw": lrv.sigma_tr_sq_raw,
        "sigma_tr": ci.sigma_tr,
        "alpha": ci.alpha,
        "half_width": ci.half_width,
        "ci_lower": ci.lower,
        "ci_upper": ci.upper,
        "clamped": lrv.clamped,
    }
    return envelope("estimate", cfg.echo(), results)


def cmd_bounds(panel: ReturnsPanel, cfg: RunConfig) -> dict:
    """Descending eigenvalues of the sample, shrunk, lower and upper matrices."""
    cov = sample_covariance(panel, cfg.centering)
    est = shrink_to_identity(cov, cfg.W)
    lrv = sigma_tr_sq(panel, cfg.kernel_for(panel.n), cfg.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWidthWarning)
        bounds = shrinkage_bounds(est, lrv, cfg.alpha)
    eig_shrunk = eigenvalues(est.matrix)
    # the bounds are the estimate shifted by a multiple of I, so their spectra are exact shifts
    results = {
        "n": panel.n,
        "d": panel.d,
        "shift": bounds.shift,
        "clamped": lrv.clamped,
        "eigenvalues": {
            "sample": eigenvalues(cov).tolist(),
            "shrunk": eig_shrunk.tolist(),
            "lower": (eig_shrunk - bounds.shift).tolist(),
            "upper": (eig_shrunk + bounds.shift).tolist(),
        },
        "condition_number": {
            "sample": _finite_or_none(condition_number(cov)),
            "shrunk": _finite_or_none(condition_number(est.matrix)),
        },
    }
    return envelope("bounds", cfg.echo(), results)


def cmd_portfolio(panel: ReturnsPanel, cfg: RunConfig, window: int) -> dict:
    """Rolling minimum-variance study, one record per non-overlapping window."""
    study = rolling_portfolio_study(panel, window, cfg.W, cfg.alpha, cfg.kernel, cfg.lag,
                                    cfg.threads)
    rows = []
    for p in study.periods:
        rows.append({
            "period": p.period,
            "start": p.start,
            "stop": p.stop,
            "risk": p.bounds.risk,
            "lower": p.bounds.lower,
            "upper": p.bounds.upper,
            "clamped": p.bounds.clamped_lower,
            "cond_raw": _finite_or_none(p.cond_raw),
            "cond_shrunk": _finite_or_none(p.cond_shrunk),
            "gross_exposure": p.weights.gross_exposure,
            "sigma_tr_sq": p.sigma_tr_sq,
            "lrv_clamped": p.lrv_clamped,
        })
    config = {**cfg.echo(), "window": window}
    return envelope("portfolio", config,
                    {"periods": rows, "skipped": study.skipped,
                     "discarded_rows": study.discarded_rows})


def coverage_document(report: CoverageReport) -> dict:
    cells = [asdict(c) for c in report.cells]
    return envelope("coverage", report.config.to_dict(), {"cells": cells})


def cmd_coverage(config: CoverageConfig, out_prefix: Path) -> tuple[Path, Path]:
    """Run the coverage study and write ``<prefix>.json`` and ``<prefix>.csv``."""
    report = run_coverage_study(config)
    doc = coverage_document(report)
    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    json_path = out_prefix.with_suffix(".json")
    csv_path = out_prefix.with_suffix(".csv")
    json_path.write_text(dumps_json(doc))
    csv_path.write_text(dumps_csv(COVERAGE_COLUMNS, doc["results"]["cells"]))
    return json_path, csv_path


def load_coverage_config(path: Optional[Path], **overrides) -> CoverageConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: expected a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return CoverageConfig(**data)
    except TypeError as exc:
        raise ConfigurationError(f"bad coverage configuration: {exc}") from exc


def _render(doc: dict, fmt: str, csv_columns=None, csv_rows=None) -> str:
    if fmt == "json":
        return dumps_json(doc)
    return dumps_csv(csv_columns, csv_rows)


def _bounds_rows(doc):
    res = doc["results"]
    eig = res["eigenvalues"]
    cond = res["condition_number"]
    return [{"index": i, "sample": eig["sample"][i], "shrunk": eig["shrunk"][i],
             "lower": eig["lower"][i], "upper": eig["upper"][i],
             "cond_sample": cond["sample"], "cond_shrunk": cond["shrunk"]}
            for i in range(res["d"])]


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shrinkcov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--input", required=True, help="CSV file, rows = time, columns = assets")
        p.add_argument("--kind", choices=("prices", "returns"), default="returns")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--no-header", action="store_true")
        p.add_argument("--missing", choices=("error", "drop_row"), default="error")
        p.add_argument("--columns", help="comma-separated subset of column names")

    def run_args(p):
        p.add_argument("--weight", type=float, default=0.2)
        p.add_argument("--alpha", type=float, default=0.10)
        p.add_argument("--kernel", choices=KERNELS, default="truncated")
        p.add_argument("--lag", type=int, default=None, help="default floor(n**0.3)")
        p.add_argument("--centering", choices=CENTERING_MODES, default="none")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=FORMATS, default="json")

    for name in ("estimate", "bounds"):
        p = sub.add_parser(name)
        data_args(p)
        run_args(p)
    p = sub.add_parser("portfolio")
    data_args(p)
    run_args(p)
    p.add_argument("--window", type=int, default=252)

    p = sub.add_parser("coverage")
    p.add_argument("--config", type=Path, default=None, help="JSON CoverageConfig fields")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--kernel", choices=KERNELS, default=None)
    p.add_argument("--lag", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, type=Path, help="output prefix for .json/.csv")

    p = sub.add_parser("simulate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--burn-in", type=int, default=200)
    p.add_argument("--independent", action="store_true",
                   help="independent innovation stream per coordinate")
    p.add_argument("--out", default=None)
    return parser


def _run(args) -> None:
    if args.command == "simulate":
        cfg = SimConfig(args.n, args.d, seed=args.seed, burn_in=args.burn_in,
                        shared_innovations=not args.independent)
        panel = simulate_ar1_panel(cfg)
        cols = [f"y{j + 1}" for j in range(panel.d)]
        rows = [dict(zip(cols, map(float, r))) for r in panel.data]
        _emit(dumps_csv(cols, rows), args.out)
        return

    if args.command == "coverage":
        config = load_coverage_config(args.config, replications=args.replications,
                                      alpha=args.alpha, kernel=args.kernel, lag=args.lag,
                                      master_seed=args.seed, workers=args.threads)
        for path in cmd_coverage(config, args.out):
            logger.info("wrote %s", path)
        return

    opts = IngestOptions(
        input_kind="prices" if args.kind == "prices" else "log_returns",
        delimiter=args.delimiter,
        header=not args.no_header,
        missing_policy=args.missing,
        column_subset=args.columns.split(",") if args.columns else None,
    )
    cfg = RunConfig(W=args.weight, alpha=args.alpha, kernel=args.kernel, lag=args.lag,
                    centering=args.centering, threads=args.threads, seed=args.seed,
                    output_format=args.format)
    panel = load_returns_csv(args.input, opts)

    if args.command == "estimate":
        doc = cmd_estimate(panel, cfg)
        res = doc["results"]
        text = _render(doc, cfg.output_format, list(res), [res])
    elif args.command == "bounds":
        doc = cmd_bounds(panel, cfg)
        rows = _bounds_rows(doc)
        text = _render(doc, cfg.output_format, list(rows[0]), rows)
    else:
        doc = cmd_portfolio(panel, cfg, args.window)
        text = _render(doc, cfg.output_format, PORTFOLIO_COLUMNS, doc["results"]["periods"])
    _emit(text, args.out)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _run(args)
    except ShrinkcovError as exc:
        print(f"shrinkcov {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
