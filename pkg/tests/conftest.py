# tests/conftest.py — deterministic synthetic chips, masks and scenes
from __future__ import annotations

from typing import Callable, Tuple

import numpy as np
import pytest

from models.raster import BinaryMask, GrayRaster

Rect = Tuple[int, int, int, int]


def speckled_chip(rng: np.random.Generator, size: int = 128, block: Rect = (52, 52, 24, 24),
                  value: int = 200, background: int = 40, speckle: int = 10) -> GrayRaster:
    """Uniform ±speckle background with one solid bright block."""
    data = background + rng.integers(-speckle, speckle + 1, size=(size, size))
    x, y, w, h = block
    data[y:y + h, x:x + w] = value
    return GrayRaster(np.clip(data, 0, 255).astype(np.uint8))


def block_shadow_chip(rng: np.random.Generator, size: int = 128, block: Rect = (44, 44, 40, 40),
                      shadow_rows: int = 20, value: int = 200, shadow_value: int = 8,
                      background: int = 70, speckle: int = 10) -> GrayRaster:
    """Bright block with a dark shadow band right below it, on mid-gray speckle."""
    data = background + rng.integers(-speckle, speckle + 1, size=(size, size))
    x, y, w, h = block
    data[y:y + h, x:x + w] = value
    if shadow_rows:
        data[y + h:y + h + shadow_rows, x:x + w] = shadow_value
    return GrayRaster(np.clip(data, 0, 255).astype(np.uint8))


def rect_mask(width: int, height: int, rect: Rect) -> BinaryMask:
    data = np.zeros((height, width), dtype=bool)
    x, y, w, h = rect
    data[y:y + h, x:x + w] = True
    return BinaryMask(data)


def random_mask(rng: np.random.Generator, width: int, height: int, p: float = 0.3) -> BinaryMask:
    return BinaryMask(rng.random((height, width)) < p)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_speckled() -> Callable[..., GrayRaster]:
    return speckled_chip


@pytest.fixture
def make_block_shadow() -> Callable[..., GrayRaster]:
    return block_shadow_chip


@pytest.fixture
def make_rect_mask() -> Callable[..., BinaryMask]:
    return rect_mask


@pytest.fixture
def make_random_mask() -> Callable[..., BinaryMask]:
    return random_mask
