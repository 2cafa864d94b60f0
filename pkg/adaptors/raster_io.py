# adaptors/raster_io.py — 8-bit grayscale PNG / binary PGM on disk ↔ GrayRaster / BinaryMask
from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from models.raster import BinaryMask, GrayRaster
from utils.errors import ManifestError, UnsupportedImage

PathLike = Union[str, Path]
_FORMATS = {".png": "PNG", ".pgm": "PPM"}


def read_raster(path: PathLike) -> GrayRaster:
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise UnsupportedImage(f"{path}: mode {im.mode!r}, only 8-bit grayscale is supported")
            return GrayRaster(np.array(im, dtype=np.uint8))
    except FileNotFoundError as exc:
        raise ManifestError(f"image not found: {path}") from exc
    except UnidentifiedImageError as exc:
        raise UnsupportedImage(f"{path}: not a readable PNG/PGM") from exc
    except OSError as exc:
        raise ManifestError(f"cannot read image {path}: {exc.strerror or exc}") from exc


def write_raster(img: GrayRaster, path: PathLike) -> Path:
    """PNG or binary PGM (P5) by suffix; written to a temp file and moved into place."""
    path = Path(path)
    fmt = _FORMATS.get(path.suffix.lower())
    if fmt is None:
        raise UnsupportedImage(f"{path}: use .png or .pgm")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    Image.fromarray(np.asarray(img.data, dtype=np.uint8)).save(tmp, format=fmt)
    os.replace(tmp, path)
    return path


def read_mask(path: PathLike) -> BinaryMask:
    return BinaryMask(read_raster(path).data > 0)


def write_mask(mask: BinaryMask, path: PathLike) -> Path:
    return write_raster(mask.to_raster(), path)
