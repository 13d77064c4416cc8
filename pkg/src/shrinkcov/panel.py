from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class ReturnsPanel:
    """An ``n x d`` block of observations: rows are time, columns are coordinates.

    The array is copied to C-contiguous float64 and frozen on construction.
    """

    data: np.ndarray
    column_labels: Optional[tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DataError(f"panel must be two-dimensional, got shape {arr.shape}")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise DataError(f"panel is empty (shape {arr.shape})")
        bad = ~np.isfinite(arr)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(f"non-finite value at row {i}, column {j}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        if self.column_labels is not None:
            labels = tuple(str(c) for c in self.column_labels)
            if len(labels) != arr.shape[1]:
                raise DataError(
                    f"{len(labels)} column labels for {arr.shape[1]} columns"
                )
            object.__setattr__(self, "column_labels", labels)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def require_rows(self, minimum: int = 2) -> None:
        if self.n < minimum:
            raise DataError(f"need at least {minimum} observations, got n={self.n}")

    def rows(self, start: int, stop: int) -> "ReturnsPanel":
        return ReturnsPanel(self.data[start:stop], self.column_labels)

    def columns(self, idx: Sequence[int]) -> "ReturnsPanel":
        labels = None
        if self.column_labels is not None:
            labels = tuple(self.column_labels[i] for i in idx)
        return ReturnsPanel(self.data[:, list(idx)], labels)
