# utils/errors.py — error hierarchy shared by services, adaptors and the CLI
from __future__ import annotations

from typing import Any, Dict


class SarSceneError(Exception):
    """Base error. `exit_code` is what the CLI returns when this escapes a command."""

    exit_code = 2

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class UsageError(SarSceneError):
    exit_code = 1


class DataError(SarSceneError):
    exit_code = 2


class AcceptanceGateFailed(SarSceneError):
    exit_code = 3


# ——— Usage / configuration ———
class ConfigError(UsageError):
    pass


# ——— Raster core ———
class InvalidKernel(DataError):
    pass


class DegenerateImage(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class UnsupportedImage(DataError):
    pass


# ——— Segmentation / labeling ———
class EmptySegmentation(DataError):
    pass


class NoTarget(DataError):
    pass


# ——— Synthesis ———
class PlacementExhausted(DataError):
    pass


class PlanSceneMismatch(DataError):
    pass


# ——— Slicing / detections ———
class InvalidStride(DataError):
    pass


class DegenerateBox(DataError):
    pass


class UnknownSlice(DataError):
    pass


class InvalidBackgroundCount(DataError):
    pass


# ——— Generative metrics ———
class TooFewSamples(DataError):
    pass


class NotPSD(DataError):
    pass


class NotSymmetric(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class InvalidSize(DataError):
    pass


# ——— Files ———
class ManifestError(DataError):
    pass
