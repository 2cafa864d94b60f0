# services/raster_ops.py — blur, thresholds, morphology and mask composition
from __future__ import annotations

from typing import Literal, Optional, Tuple

import numpy as np
from scipy import ndimage

from models.raster import BinaryMask, GrayRaster, StructuringElement
from utils.errors import DegenerateImage, InvalidKernel, ShapeMismatch, UsageError
from utils.log import dbg

MorphOp = Literal["erode", "dilate", "open", "close"]

DEFAULT_SE = StructuringElement(3)


def _dbg(tag: str, val: object) -> None:
    dbg("raster", tag, val)


# ——— Blur ———
def default_blur(width: int, height: int) -> Tuple[int, float]:
    """Kernel side = nearest odd integer to min(w, h)/25 clamped to [3, 9]; sigma from the side."""
    target = min(width, height) / 25.0
    side = 2 * int(np.floor((target - 1) / 2 + 0.5)) + 1
    side = min(9, max(3, side))
    # small images cannot hold the clamped kernel
    limit = min(width, height)
    if side > limit:
        side = limit if limit % 2 == 1 else limit - 1
    sigma = 0.3 * ((side - 1) * 0.5 - 1) + 0.8
    return side, sigma


def gaussian_kernel_1d(side: int, sigma: float) -> np.ndarray:
    r = side // 2
    xs = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(xs ** 2) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: GrayRaster, kernel_side: Optional[int] = None, sigma: Optional[float] = None) -> GrayRaster:
    """Separable normalized Gaussian, edge replication at the border, rounded to integers."""
    d_side, d_sigma = default_blur(img.width, img.height)
    side = d_side if kernel_side is None else int(kernel_side)
    sig = d_sigma if sigma is None else float(sigma)
    if side < 1 or side % 2 == 0:
        raise InvalidKernel(f"kernel side must be odd, got {side}")
    if side > min(img.width, img.height):
        raise InvalidKernel(f"kernel side {side} exceeds image {img.width}x{img.height}")
    if not sig > 0:
        raise InvalidKernel(f"sigma must be > 0, got {sig}")
    if side == 1:
        return img

    k = gaussian_kernel_1d(side, sig)
    out = img.data.astype(np.float64)
    out = ndimage.correlate1d(out, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return GrayRaster(np.clip(np.rint(out), 0, 255).astype(np.uint8))


# ——— Thresholds ———
def histogram(img: GrayRaster) -> np.ndarray:
    return np.bincount(img.data.ravel(), minlength=256).astype(np.int64)


def percentile_threshold(img: GrayRaster, fraction: float) -> int:
    """Intensity at rank floor(fraction * (N - 1)) of the sorted pixels.

    About `fraction` of the pixels sit at or below the returned p, so
    binarize(img, p) keeps the brightest (1 - fraction) share.
    """
    if not 0.0 < fraction < 1.0:
        raise UsageError(f"fraction must lie in (0, 1), got {fraction}")
    cdf = np.cumsum(histogram(img))
    n = int(cdf[-1])
    rank = int(np.floor(fraction * (n - 1)))
    return int(np.searchsorted(cdf, rank + 1, side="left"))


def binarize(img: GrayRaster, p: int) -> BinaryMask:
    if not 0 <= p <= 255:
        raise UsageError(f"threshold must lie in [0, 255], got {p}")
    return BinaryMask(img.data > p)


def otsu_threshold(img: GrayRaster) -> int:
    """Threshold maximizing between-class variance; classes are <= t and > t.

    Scores are compared exactly as the integer ratio (N*S0 - S*n0)^2 / (n0*n1),
    so ties resolve to the smallest t without floating-point noise.
    """
    hist = histogram(img)
    if np.count_nonzero(hist) < 2:
        raise DegenerateImage("image has a single intensity; OTSU is undefined")

    n = int(hist.sum())
    total = int(np.dot(np.arange(256, dtype=np.int64), hist))
    n0 = np.cumsum(hist)
    s0 = np.cumsum(np.arange(256, dtype=np.int64) * hist)

    best_t, best_num, best_den = 0, 0, 1
    for t in range(256):
        c0 = int(n0[t])
        c1 = n - c0
        if c0 == 0 or c1 == 0:
            continue
        diff = n * int(s0[t]) - total * c0
        num, den = diff * diff, c0 * c1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    _dbg("otsu", best_t)
    return best_t


# ——— Morphology ———
def _check_se(mask: BinaryMask, se: StructuringElement) -> None:
    if se.side > min(mask.width, mask.height):
        raise InvalidKernel(f"structuring element {se.side} exceeds mask {mask.width}x{mask.height}")


def erode(mask: BinaryMask, se: StructuringElement = DEFAULT_SE) -> BinaryMask:
    _check_se(mask, se)
    return BinaryMask(ndimage.binary_erosion(mask.data, structure=se.footprint(), border_value=0))


def dilate(mask: BinaryMask, se: StructuringElement = DEFAULT_SE) -> BinaryMask:
    _check_se(mask, se)
    return BinaryMask(ndimage.binary_dilation(mask.data, structure=se.footprint(), border_value=0))


def morph(mask: BinaryMask, op: MorphOp, se: StructuringElement = DEFAULT_SE) -> BinaryMask:
    """Set morphology with everything outside the mask treated as background."""
    if op == "erode":
        return erode(mask, se)
    if op == "dilate":
        return dilate(mask, se)
    if op == "open":
        return dilate(erode(mask, se), se)
    if op == "close":
        return erode(dilate(mask, se), se)
    raise UsageError(f"unknown morphology op {op!r}")


# ——— Composition ———
def compose(chip: GrayRaster, scene_cut: GrayRaster, mask: BinaryMask) -> GrayRaster:
    """Chip pixels under the mask, scene pixels elsewhere."""
    if not (chip.shape == scene_cut.shape == mask.shape):
        raise ShapeMismatch(f"compose shapes differ: chip {chip.shape}, scene {scene_cut.shape}, mask {mask.shape}")
    return GrayRaster(np.where(mask.data, chip.data, scene_cut.data))


def invert(img: GrayRaster) -> GrayRaster:
    return GrayRaster(255 - img.data)


def connected_components(mask: BinaryMask) -> int:
    """Number of 8-connected foreground components."""
    _, count = ndimage.label(mask.data, structure=np.ones((3, 3), dtype=bool))
    return int(count)
