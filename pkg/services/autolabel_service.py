# services/autolabel_service.py — bounding boxes for single-target chips
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from models.boxes import LabeledBox
from models.params import AutoLabelParams
from models.raster import BinaryMask, GrayRaster
from services.detect_service import iou
from services.segmentation_service import threshold_stage
from utils.errors import NoTarget, SarSceneError
from utils.log import dbg
from utils.parallel import parallel_map

Rect = Tuple[int, int, int, int]


def _dbg(tag: str, val: object) -> None:
    dbg("autolabel", tag, val)


# ——— Four-direction traversal ———
def traverse_bounds(mask: BinaryMask, threshold: int) -> Rect:
    """Rectangle fixed by the first row/column, from each side, holding >= threshold foreground pixels."""
    rows = mask.data.sum(axis=1)
    cols = mask.data.sum(axis=0)
    hit_rows = np.flatnonzero(rows >= threshold)
    if hit_rows.size == 0:
        raise NoTarget(f"no row reaches {threshold} foreground pixels (top/bottom traversal)")
    hit_cols = np.flatnonzero(cols >= threshold)
    if hit_cols.size == 0:
        raise NoTarget(f"no column reaches {threshold} foreground pixels (left/right traversal)")
    top, bottom = int(hit_rows[0]), int(hit_rows[-1])
    left, right = int(hit_cols[0]), int(hit_cols[-1])
    return left, top, right - left + 1, bottom - top + 1


def _grow(start: int, extent: int, fraction: float) -> Tuple[int, int]:
    new_extent = int(np.floor(extent * (1.0 + fraction) + 0.5))
    grow = new_extent - extent
    return start - grow // 2, new_extent


def expand_rect(rect: Rect, fraction: float) -> Rect:
    """Concentric growth: w' = round(w(1+f)); the extra pixels split floor-half before, the rest after."""
    x, y, w, h = rect
    nx, nw = _grow(x, w, fraction)
    ny, nh = _grow(y, h, fraction)
    return nx, ny, nw, nh


def clamp_rect(rect: Rect, width: int, height: int) -> Rect:
    x, y, w, h = rect
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(width, x + w), min(height, y + h)
    return x0, y0, x1 - x0, y1 - y0


def auto_label(chip: GrayRaster, class_id: int, params: AutoLabelParams = AutoLabelParams()) -> LabeledBox:
    mask = threshold_stage(chip, params.binarize)
    raw = traverse_bounds(mask, params.white_pixel_threshold)
    grown = expand_rect(raw, params.expand_fraction)
    x, y, w, h = clamp_rect(grown, chip.width, chip.height)
    _dbg("box", {"raw": raw, "expanded": grown, "clamped": (x, y, w, h)})
    return LabeledBox(class_id=class_id, x=x, y=y, w=w, h=h)


# ——— Batch ———
@dataclass
class LabelOutcome:
    image: str
    class_name: str
    class_id: int
    width: int = 0
    height: int = 0
    box: Optional[LabeledBox] = None
    mislabeled: bool = False
    error: Optional[Dict[str, str]] = None


@dataclass
class BatchLabels:
    outcomes: List[LabelOutcome] = field(default_factory=list)

    @property
    def labeled(self) -> List[LabelOutcome]:
        return [o for o in self.outcomes if o.box is not None]

    @property
    def errors(self) -> List[Dict[str, str]]:
        return [o.error for o in self.outcomes if o.error]

    def report(self) -> pd.DataFrame:
        """Per class: Image Num, No target, Not correctly labeled, Error rate (%); plus an Average row."""
        cols = ["class", "Image Num", "No target", "Not correctly labeled", "Error rate(%)"]
        if not self.outcomes:
            return pd.DataFrame(columns=cols)
        df = pd.DataFrame([{
            "class": o.class_name,
            "no_target": o.error is not None and o.error.get("error") == "NoTarget",
            "failed": o.box is None or o.mislabeled,
        } for o in self.outcomes])
        out = df.groupby("class", sort=False).agg(
            **{"Image Num": ("failed", "count"),
               "No target": ("no_target", "sum"),
               "Not correctly labeled": ("failed", "sum")}
        ).reset_index()
        out["No target"] = out["No target"].astype(int)
        out["Not correctly labeled"] = out["Not correctly labeled"].astype(int)
        out["Error rate(%)"] = (100.0 * out["Not correctly labeled"] / out["Image Num"]).round(2)
        avg = pd.DataFrame([{"class": "Average", "Image Num": int(out["Image Num"].sum()),
                             "No target": int(out["No target"].sum()),
                             "Not correctly labeled": int(out["Not correctly labeled"].sum()),
                             "Error rate(%)": round(float(out["Error rate(%)"].mean()), 2)}])
        return pd.concat([out, avg], ignore_index=True)[cols]


def batch_autolabel(entries: List[Mapping[str, object]],
                    class_id_of: Callable[[str], int],
                    params_for: Callable[[str], AutoLabelParams],
                    references: Optional[Mapping[str, LabeledBox]] = None,
                    iou_min: float = 0.5,
                    workers: Optional[int] = None,
                    loader=None) -> BatchLabels:
    """Label every entry; boxes under `iou_min` against a supplied reference count as mislabeled."""
    if loader is None:
        from adaptors.raster_io import read_raster
        loader = read_raster
    refs = references or {}

    def one(entry: Mapping[str, object]) -> LabelOutcome:
        name = str(entry["class"])
        out = LabelOutcome(image=str(entry["image"]), class_name=name, class_id=-1)
        try:
            out.class_id = class_id_of(name)
            chip = loader(Path(out.image))
            out.width, out.height = chip.width, chip.height
            out.box = auto_label(chip, out.class_id, params_for(name))
            ref = refs.get(out.image)
            if ref is not None and iou(out.box, ref) < iou_min:
                out.mislabeled = True
        except SarSceneError as exc:
            out.error = {"image": out.image, **exc.to_dict()}
            _dbg("item error", out.error)
        return out

    return BatchLabels(outcomes=parallel_map(one, entries, workers))
