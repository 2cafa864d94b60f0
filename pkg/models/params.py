# models/params.py — tunables for segmentation and auto-labeling
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

# Per-class object fractions for the ten MSTAR vehicle classes.
DEFAULT_CLASS_FRACTIONS = {
    "2S1": 0.92,
    "BRDM2": 0.88,
    "BTR60": 0.90,
    "D7": 0.92,
    "T62": 0.90,
    "ZIL131": 0.90,
    "ZSU234": 0.95,
    "BMP2": 0.95,
    "BTR70": 0.95,
    "T72": 0.95,
}


class BlurParams(BaseModel):
    """Gaussian blur override; None means derive from the image size."""

    model_config = ConfigDict(frozen=True)

    kernel_side: Optional[int] = Field(default=None, ge=1)
    sigma: Optional[float] = Field(default=None, gt=0)

    @field_validator("kernel_side")
    @classmethod
    def _odd(cls, v):
        if v is not None and v % 2 == 0:
            raise ValueError("kernel_side must be odd")
        return v


class SegmentationParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    percentile_fraction: float = Field(default=0.90, gt=0.0, lt=1.0)
    shadow_value: int = Field(default=5, ge=0, lt=64)
    blur: BlurParams = BlurParams()
    se_side: int = Field(default=3, ge=1)
    threshold_method: Literal["percentile", "otsu"] = "percentile"

    @field_validator("se_side")
    @classmethod
    def _odd_se(cls, v):
        if v % 2 == 0:
            raise ValueError("se_side must be odd")
        return v


class AutoLabelParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    white_pixel_threshold: int = Field(default=10, ge=1)
    expand_fraction: float = Field(default=0.5, ge=0.0)
    binarize: SegmentationParams = SegmentationParams()
