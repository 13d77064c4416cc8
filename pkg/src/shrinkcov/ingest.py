"""CSV ingestion: rows are time (ascending), columns are assets."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DataError
from .panel import ReturnsPanel

INPUT_KINDS = ("prices", "log_returns")
MISSING_POLICIES = ("error", "drop_row")
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none"})


@dataclass(frozen=True)
class IngestOptions:
    input_kind: str = "log_returns"
    delimiter: str = ","
    header: bool = True
    missing_policy: str = "error"
    column_subset: Optional[Sequence[str]] = None

    def __post_init__(self):
        if self.input_kind not in INPUT_KINDS:
            raise ConfigurationError(f"unknown input kind {self.input_kind!r}")
        if self.missing_policy not in MISSING_POLICIES:
            raise ConfigurationError(f"unknown missing policy {self.missing_policy!r}")
        if len(self.delimiter) != 1:
            raise ConfigurationError("delimiter must be a single character")
        if self.column_subset is not None:
            object.__setattr__(self, "column_subset", tuple(self.column_subset))


def _select(labels: list[str], subset) -> list[int]:
    idx = []
    for name in subset:
        if name in labels:
            idx.append(labels.index(name))
        elif name.isdigit() and int(name) < len(labels):
            idx.append(int(name))
        else:
            raise DataError(f"column {name!r} not found")
    return idx


def load_returns_csv(path, opts: IngestOptions = IngestOptions()) -> ReturnsPanel:
    """Read a numeric table into a panel.

    With ``input_kind="prices"`` each column is turned into log returns
    ``log(P_t / P_{t-1})``, so the panel has one row fewer than the file.
    Row numbers in error messages count file lines from 1.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh, delimiter=opts.delimiter))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    rows = [(lineno, r) for lineno, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} is empty")
    if opts.header:
        labels = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    else:
        labels = [f"x{j}" for j in range(len(rows[0][1]))]
    width = len(labels)
    keep = list(range(width)) if opts.column_subset is None else _select(labels, opts.column_subset)

    values = []
    for lineno, r in rows:
        if len(r) != width:
            raise DataError(f"row {lineno}: {len(r)} fields, expected {width}")
        parsed, missing = [], False
        for j in keep:
            tok = r[j].strip()
            if tok.lower() in MISSING_TOKENS:
                missing = True
                parsed.append(math.nan)
                continue
            try:
                v = float(tok)
            except ValueError:
                raise DataError(f"row {lineno}, column {labels[j]!r}: not a number: {tok!r}") from None
            if not math.isfinite(v):
                raise DataError(f"row {lineno}, column {labels[j]!r}: non-finite value {tok!r}")
            parsed.append(v)
        if missing:
            if opts.missing_policy == "error":
                raise DataError(f"row {lineno}: missing value")
            continue
        values.append((lineno, parsed))

    if not values:
        raise DataError(f"{path} has no complete data rows")
    data = np.array([v for _, v in values], dtype=np.float64)
    labels = [labels[j] for j in keep]

    if opts.input_kind == "prices":
        bad = np.argwhere(data <= 0)
        if bad.size:
            i, j = bad[0]
            raise DataError(f"row {values[i][0]}, column {labels[j]!r}: nonpositive price")
        if data.shape[0] < 2:
            raise DataError("need at least two prices to form a return")
        data = np.log(data[1:] / data[:-1])

    return ReturnsPanel(data, tuple(labels))
