# services/segmentation_service.py — object and object+shadow masks for target chips
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

from models.params import SegmentationParams
from models.raster import BinaryMask, GrayRaster, StructuringElement
from services.raster_ops import (
    binarize, dilate, erode, gaussian_blur, invert, morph, otsu_threshold, percentile_threshold,
)
from utils.errors import DegenerateImage, EmptySegmentation, SarSceneError, ShapeMismatch
from utils.log import dbg
from utils.parallel import parallel_map


def _dbg(tag: str, val: object) -> None:
    dbg("segment", tag, val)


def _blur(chip: GrayRaster, params: SegmentationParams) -> GrayRaster:
    return gaussian_blur(chip, params.blur.kernel_side, params.blur.sigma)


def threshold_stage(chip: GrayRaster, params: SegmentationParams) -> BinaryMask:
    """Blur, pick the threshold (percentile or OTSU), binarize. No morphology."""
    if chip.distinct_count() < 2:
        raise DegenerateImage("chip has a single intensity")
    blurred = _blur(chip, params)
    if params.threshold_method == "otsu":
        p = otsu_threshold(blurred)
    else:
        p = percentile_threshold(blurred, params.percentile_fraction)
    _dbg("threshold", (params.threshold_method, p))
    return binarize(blurred, p)


def segment_object(chip: GrayRaster, params: SegmentationParams = SegmentationParams()) -> BinaryMask:
    """Object only: blur → threshold → binarize → close → open."""
    se = StructuringElement(params.se_side)
    mask = threshold_stage(chip, params)
    mask = morph(morph(mask, "close", se), "open", se)
    if mask.is_empty():
        raise EmptySegmentation("object mask is empty after morphology (threshold too high?)")
    return mask


def segment_object_shadow(chip: GrayRaster, object_mask: BinaryMask,
                          params: SegmentationParams = SegmentationParams()) -> BinaryMask:
    """Object plus shadow.

    The object is painted down to `shadow_value` so it merges with the dark
    shadow, the chip is inverted (dark → bright) and blurred, OTSU splits the
    bright region off, then close → open → dilate. The eroded object body is
    always part of the result.
    """
    if object_mask.shape != chip.shape:
        raise ShapeMismatch(f"mask {object_mask.shape} does not match chip {chip.shape}")
    if object_mask.is_empty():
        raise EmptySegmentation("object mask is empty")

    se = StructuringElement(params.se_side)
    shadowed = GrayRaster(np.where(object_mask.data, params.shadow_value, chip.data).astype(np.uint8))
    lightened = _blur(invert(shadowed), params)
    p = otsu_threshold(lightened)
    _dbg("shadow otsu", p)
    mask = binarize(lightened, p)
    mask = dilate(morph(morph(mask, "close", se), "open", se), se)
    mask = mask.union(erode(object_mask, se))
    if mask.is_empty():
        raise EmptySegmentation("object+shadow mask is empty")
    return mask


# ——— Batch ———
@dataclass
class ChipResult:
    image: str
    class_name: str
    object_mask: Optional[BinaryMask] = None
    shadow_mask: Optional[BinaryMask] = None
    success: bool = False
    error: Optional[Dict[str, str]] = None


@dataclass
class BatchSegmentation:
    results: List[ChipResult] = field(default_factory=list)
    method: str = "percentile"

    @property
    def errors(self) -> List[Dict[str, str]]:
        return [r.error for r in self.results if r.error]

    def summary(self) -> pd.DataFrame:
        """One row per class: Number, Success, Acc(%); plus an Average row."""
        if not self.results:
            return pd.DataFrame(columns=["class", "Number", "Success", "Acc(%)"])
        df = pd.DataFrame([{"class": r.class_name, "success": r.success} for r in self.results])
        out = (
            df.groupby("class", sort=False)["success"]
            .agg(Number="count", Success="sum")
            .reset_index()
        )
        out["Success"] = out["Success"].astype(int)
        out["Acc(%)"] = (100.0 * out["Success"] / out["Number"]).round(2)
        avg = pd.DataFrame([{"class": "Average", "Number": int(out["Number"].sum()),
                             "Success": int(out["Success"].sum()),
                             "Acc(%)": round(float(out["Acc(%)"].mean()), 2)}])
        return pd.concat([out, avg], ignore_index=True)


def overlaps_center(mask: BinaryMask) -> bool:
    """Success rule: non-empty mask whose bounding box meets the central 50% window."""
    bb = mask.bbox()
    if bb is None:
        return False
    x, y, w, h = bb
    cx0, cy0 = mask.width / 4.0, mask.height / 4.0
    cx1, cy1 = 3 * mask.width / 4.0, 3 * mask.height / 4.0
    return x < cx1 and x + w > cx0 and y < cy1 and y + h > cy0


def segment_chip(chip: GrayRaster, params: SegmentationParams, with_shadow: bool = True):
    obj = segment_object(chip, params)
    shadow = segment_object_shadow(chip, obj, params) if with_shadow else None
    return obj, shadow


def batch_segment(entries: List[Mapping[str, str]],
                  params_for: Mapping[str, SegmentationParams] | SegmentationParams,
                  with_shadow: bool = True,
                  workers: Optional[int] = None,
                  loader=None) -> BatchSegmentation:
    """Segment every manifest entry ({"image", "class"}); item failures are recorded, not raised."""
    if loader is None:
        from adaptors.raster_io import read_raster
        loader = read_raster

    def params_of(cls_name: str) -> SegmentationParams:
        if isinstance(params_for, SegmentationParams):
            return params_for
        return params_for.get(cls_name) or SegmentationParams()

    def one(entry: Mapping[str, str]) -> ChipResult:
        res = ChipResult(image=str(entry["image"]), class_name=str(entry["class"]))
        try:
            chip = loader(Path(entry["image"]))
            obj, shadow = segment_chip(chip, params_of(res.class_name), with_shadow)
            res.object_mask, res.shadow_mask = obj, shadow
            res.success = overlaps_center(obj)
        except SarSceneError as exc:
            res.error = {"image": res.image, **exc.to_dict()}
            _dbg("item error", res.error)
        return res

    results = parallel_map(one, entries, workers)
    method = params_for.threshold_method if isinstance(params_for, SegmentationParams) else "percentile"
    return BatchSegmentation(results=results, method=method)


def compare_threshold_methods(entries: List[Mapping[str, str]],
                              params_for: Mapping[str, SegmentationParams],
                              workers: Optional[int] = None,
                              loader=None) -> pd.DataFrame:
    """Per-class object-segmentation accuracy for the percentile rule and for OTSU, side by side."""
    rows = {}
    for method in ("percentile", "otsu"):
        per_class = {k: v.model_copy(update={"threshold_method": method}) for k, v in params_for.items()}
        default = SegmentationParams(threshold_method=method)
        classes = {str(e["class"]) for e in entries}
        for c in classes:
            per_class.setdefault(c, default)
        run = batch_segment(entries, per_class, with_shadow=False, workers=workers, loader=loader)
        summary = run.summary()
        rows[method] = dict(zip(summary["class"], summary["Acc(%)"]))
    return pd.DataFrame(rows).T
