# adaptors/features_io.py — feature sets as CSV or raw little-endian float64 + JSON sidecar
from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from adaptors.manifests import load_json, save_json
from models.features import FeatureSet
from utils.errors import ManifestError

PathLike = Union[str, Path]


def sidecar(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def read_csv(path: PathLike) -> FeatureSet:
    """One sample per row, no header."""
    try:
        df = pd.read_csv(path, header=None, dtype=np.float64, float_precision="round_trip")
    except FileNotFoundError as exc:
        raise ManifestError(f"feature file not found: {path}") from exc
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ManifestError(f"{path}: not a numeric CSV ({exc})") from exc
    return FeatureSet(df.to_numpy())


def write_csv(fs: FeatureSet, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(fs.rows).to_csv(path, header=False, index=False, float_format="%.17g")
    return path


def read_raw(path: PathLike) -> FeatureSet:
    meta = load_json(sidecar(path))
    try:
        n, d = int(meta["n"]), int(meta["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"{sidecar(path)}: needs integer 'n' and 'd'") from exc
    try:
        flat = np.fromfile(path, dtype="<f8")
    except FileNotFoundError as exc:
        raise ManifestError(f"feature file not found: {path}") from exc
    if flat.size != n * d:
        raise ManifestError(f"{path}: {flat.size} values, sidecar says {n}x{d}")
    return FeatureSet(flat.reshape(n, d))


def write_raw(fs: FeatureSet, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fs.rows.astype("<f8").tofile(path)
    save_json({"n": fs.n, "d": fs.d}, sidecar(path))
    return path


def read_features(path: PathLike) -> FeatureSet:
    """CSV by suffix, otherwise raw matrix with a sidecar."""
    if Path(path).suffix.lower() == ".csv":
        return read_csv(path)
    return read_raw(path)
