# models/raster.py — pixel containers shared by every service
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.errors import InvalidKernel, ShapeMismatch, UnsupportedImage


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GrayRaster:
    """8-bit single-channel image, row-major (height, width) uint8 array, read-only."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, copy=True)
        if arr.ndim != 2 or arr.shape[0] <= 0 or arr.shape[1] <= 0:
            raise ShapeMismatch(f"raster must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise UnsupportedImage("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "data", _frozen(arr))

    @classmethod
    def filled(cls, width: int, height: int, value: int) -> "GrayRaster":
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def crop(self, x: int, y: int, w: int, h: int) -> "GrayRaster":
        if x < 0 or y < 0 or x + w > self.width or y + h > self.height:
            raise ShapeMismatch(f"crop ({x},{y},{w},{h}) outside {self.width}x{self.height}")
        return GrayRaster(self.data[y:y + h, x:x + w].copy())

    def distinct_count(self) -> int:
        return int(np.count_nonzero(np.bincount(self.data.ravel(), minlength=256)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GrayRaster) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean raster; True is foreground."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=bool, copy=True)
        if arr.ndim != 2 or arr.shape[0] <= 0 or arr.shape[1] <= 0:
            raise ShapeMismatch(f"mask must be a non-empty 2-D array, got shape {arr.shape}")
        object.__setattr__(self, "data", _frozen(arr))

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.data))

    def is_empty(self) -> bool:
        return not self.data.any()

    def invert(self) -> "BinaryMask":
        return BinaryMask(~self.data)

    def union(self, other: "BinaryMask") -> "BinaryMask":
        if other.shape != self.shape:
            raise ShapeMismatch(f"mask shapes differ: {self.shape} vs {other.shape}")
        return BinaryMask(self.data | other.data)

    def iou(self, other: "BinaryMask") -> float:
        if other.shape != self.shape:
            raise ShapeMismatch(f"mask shapes differ: {self.shape} vs {other.shape}")
        union = np.count_nonzero(self.data | other.data)
        if union == 0:
            return 0.0
        return float(np.count_nonzero(self.data & other.data) / union)

    def bbox(self) -> Tuple[int, int, int, int] | None:
        """Tight (x, y, w, h) of the foreground, None when empty."""
        rows = np.flatnonzero(self.data.any(axis=1))
        cols = np.flatnonzero(self.data.any(axis=0))
        if rows.size == 0:
            return None
        return int(cols[0]), int(rows[0]), int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1)

    def to_raster(self) -> GrayRaster:
        return GrayRaster(np.where(self.data, 255, 0).astype(np.uint8))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BinaryMask) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class StructuringElement:
    """Square element of odd side k, anchored at its center."""

    side: int = 3

    def __post_init__(self):
        if self.side < 1 or self.side % 2 == 0:
            raise InvalidKernel(f"structuring element side must be odd and >= 1, got {self.side}")

    @property
    def radius(self) -> int:
        return self.side // 2

    def footprint(self) -> np.ndarray:
        return np.ones((self.side, self.side), dtype=bool)
