# models/features.py — sample × feature matrices scored by Fréchet distance
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from utils.errors import DataError


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """(n, d) float64 rows, one per sample; all entries finite."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.rows, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise DataError(f"feature set must be 2-D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DataError("feature set holds non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1])

    def transformed(self, matrix: np.ndarray, shift: np.ndarray | None = None) -> "FeatureSet":
        out = self.rows @ np.asarray(matrix, dtype=np.float64).T
        if shift is not None:
            out = out + np.asarray(shift, dtype=np.float64)
        return FeatureSet(out)
