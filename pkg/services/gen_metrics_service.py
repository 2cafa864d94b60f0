# services/gen_metrics_service.py — Fréchet distance over feature sets, uniform-noise corruption
from __future__ import annotations

from typing import Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from models.features import FeatureSet
from models.raster import GrayRaster
from utils.errors import DimensionMismatch, InvalidSize, NotPSD, NotSymmetric, TooFewSamples, UsageError
from utils.log import dbg

SYM_TOL = 1e-8
NEG_EIG_TOL = 1e-8
FID_CLAMP = 1e-6
NOISE_LEVELS = (0.01, 0.05, 0.10, 0.15, 0.20)

Seed = Union[int, Sequence[int]]


def _dbg(tag: str, val: object) -> None:
    dbg("gen-metrics", tag, val)


# ——— Gaussian fit ———
def mean_cov(fs: FeatureSet) -> Tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased (n-1) covariance, symmetrized."""
    if fs.n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {fs.n}")
    mu = fs.rows.mean(axis=0)
    cov = np.atleast_2d(np.cov(fs.rows, rowvar=False, ddof=1))
    return mu, (cov + cov.T) / 2.0


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigh; eigenvalues in [-tol, 0] are treated as 0."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    if m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"matrix is not square: {m.shape}")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 1.0)
    if np.abs(m - m.T).max(initial=0.0) > SYM_TOL * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    w, v = linalg.eigh((m + m.T) / 2.0)
    if w.size and w.min() < -NEG_EIG_TOL * scale:
        raise NotPSD(f"smallest eigenvalue {w.min():.3e} is negative")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return (root + root.T) / 2.0


def frechet_distance(mu_r: np.ndarray, cov_r: np.ndarray, mu_g: np.ndarray, cov_g: np.ndarray) -> float:
    """||mu_r - mu_g||² + Tr(cov_r + cov_g - 2 (cov_r^½ cov_g cov_r^½)^½)."""
    s = psd_sqrt(cov_r)
    cross = s @ cov_g @ s
    tr_cross = float(np.trace(psd_sqrt((cross + cross.T) / 2.0)))
    diff = mu_r - mu_g
    value = float(diff @ diff + np.trace(cov_r) + np.trace(cov_g) - 2.0 * tr_cross)
    if -FID_CLAMP < value < 0.0:
        value = 0.0
    return value


def fid(real: FeatureSet, gen: FeatureSet) -> float:
    if real.d != gen.d:
        raise DimensionMismatch(f"feature dimensions differ: {real.d} vs {gen.d}")
    mu_r, cov_r = mean_cov(real)
    mu_g, cov_g = mean_cov(gen)
    value = frechet_distance(mu_r, cov_r, mu_g, cov_g)
    _dbg("fid", f"n={real.n}/{gen.n} d={real.d} -> {value:.6f}")
    return value


# ——— Deterministic stand-in feature extractor ———
def baseline_features(img: GrayRaster, d_side: int) -> np.ndarray:
    """Block-average downsample to d_side × d_side, flattened, intensities scaled to [0, 1]."""
    if d_side <= 0 or d_side > min(img.width, img.height):
        raise InvalidSize(f"d_side {d_side} must lie in [1, {min(img.width, img.height)}]")
    data = img.data.astype(np.float64)
    rows = (np.arange(d_side) * img.height) // d_side
    cols = (np.arange(d_side) * img.width) // d_side
    sums = np.add.reduceat(np.add.reduceat(data, rows, axis=0), cols, axis=1)
    heights = np.diff(np.append(rows, img.height))
    widths = np.diff(np.append(cols, img.width))
    means = sums / np.outer(heights, widths)
    return (means / 255.0).ravel()


def features_of(images: Sequence[GrayRaster], d_side: int) -> FeatureSet:
    return FeatureSet(np.stack([baseline_features(im, d_side) for im in images]))


# ——— Noise corruption ———
def noise_count(fraction: float, size: int) -> int:
    return int(np.floor(fraction * size + 0.5))


def inject_noise(img: GrayRaster, fraction: float, seed: Seed) -> GrayRaster:
    """Replace round(fraction·N) distinct pixels, chosen without replacement, by uniform intensities 0..255."""
    if not 0.0 <= fraction <= 1.0:
        raise UsageError(f"fraction must lie in [0, 1], got {fraction}")
    n = noise_count(fraction, img.data.size)
    if n == 0:
        return img
    rng = np.random.default_rng(seed)
    pos = rng.choice(img.data.size, size=n, replace=False)
    out = img.data.ravel().copy()
    out[pos] = rng.integers(0, 256, size=n, dtype=np.uint8)
    return GrayRaster(out.reshape(img.shape))


def sweep_seed(base: int, fraction: float, index: int = 0) -> Tuple[int, int, int]:
    """Seed for one image at one noise level; independent streams per (level, image)."""
    return base, int(round(fraction * 10_000)), index
