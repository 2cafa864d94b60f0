# services/detect_service.py — IoU, slice → scene mapping and cross-slice NMS
from __future__ import annotations

from typing import Dict, List, Sequence

import numpy as np

from models.boxes import Detection, LabeledBox
from utils.errors import DegenerateBox, UnknownSlice
from utils.log import dbg

DEFAULT_NMS_IOU = 0.7


def _dbg(tag: str, val: object) -> None:
    dbg("nms", tag, val)


def iou(a: LabeledBox, b: LabeledBox) -> float:
    if a.w <= 0 or a.h <= 0 or b.w <= 0 or b.h <= 0:
        raise DegenerateBox("boxes need positive width and height")
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.w * a.h + b.w * b.h - inter)


def boxes_array(boxes: Sequence[LabeledBox]) -> np.ndarray:
    """(n, 4) float64 array of x, y, w, h."""
    if not boxes:
        return np.zeros((0, 4), dtype=np.float64)
    return np.array([[b.x, b.y, b.w, b.h] for b in boxes], dtype=np.float64)


def iou_many(box: np.ndarray, others: np.ndarray) -> np.ndarray:
    """IoU of one (x, y, w, h) row against many; same arithmetic as `iou`."""
    iw = np.minimum(box[0] + box[2], others[:, 0] + others[:, 2]) - np.maximum(box[0], others[:, 0])
    ih = np.minimum(box[1] + box[3], others[:, 1] + others[:, 3]) - np.maximum(box[1], others[:, 1])
    inter = np.where((iw > 0) & (ih > 0), iw * ih, 0.0)
    union = box[2] * box[3] + others[:, 2] * others[:, 3] - inter
    return inter / union


def iou_matrix(a: Sequence[LabeledBox], b: Sequence[LabeledBox]) -> np.ndarray:
    arr_a, arr_b = boxes_array(a), boxes_array(b)
    if (arr_a[:, 2:] <= 0).any() or (arr_b[:, 2:] <= 0).any():
        raise DegenerateBox("boxes need positive width and height")
    out = np.zeros((len(arr_a), len(arr_b)), dtype=np.float64)
    for k in range(len(arr_a)):
        if len(arr_b):
            out[k] = iou_many(arr_a[k], arr_b)
    return out


# ——— Coordinate conversion ———
def map_to_scene(d: Detection) -> Detection:
    """x = x' + i*stride, y = y' + j*stride; class, size and confidence unchanged."""
    if d.source is None:
        raise UnknownSlice("detection has no slice reference")
    src = d.source
    return d.model_copy(update={
        "x": d.x + src.i * src.stride,
        "y": d.y + src.j * src.stride,
        "scene_id": src.scene_id,
        "source": None,
    })


# ——— NMS ———
def _order(dets: Sequence[Detection]) -> List[int]:
    return sorted(range(len(dets)), key=lambda k: dets[k].sort_key())


def _nms_agnostic(dets: Sequence[Detection], iou_threshold: float) -> List[int]:
    order = np.array(_order(dets), dtype=np.int64)
    arr = boxes_array(dets)
    keep: List[int] = []
    while order.size > 0:
        i = int(order[0])
        keep.append(i)
        if order.size == 1:
            break
        ovr = iou_many(arr[i], arr[order[1:]])
        order = order[1:][ovr <= iou_threshold]
    return keep


def nms(detections: Sequence[Detection], iou_threshold: float = DEFAULT_NMS_IOU,
        per_class: bool = False) -> List[Detection]:
    """Greedy NMS: keep the best remaining box, drop every other box with IoU > threshold against it.

    Ordering is descending confidence, then x, y, class_id. Class-agnostic
    unless `per_class`.
    """
    dets = list(detections)
    if not dets:
        return []
    if (boxes_array(dets)[:, 2:] <= 0).any():
        raise DegenerateBox("boxes need positive width and height")
    if per_class:
        groups: Dict[int, List[int]] = {}
        for k, d in enumerate(dets):
            groups.setdefault(d.class_id, []).append(k)
        kept_idx = []
        for members in groups.values():
            sub = [dets[k] for k in members]
            kept_idx.extend(members[k] for k in _nms_agnostic(sub, iou_threshold))
    else:
        kept_idx = _nms_agnostic(dets, iou_threshold)
    kept = sorted((dets[k] for k in kept_idx), key=lambda d: d.sort_key())
    _dbg("kept", f"{len(kept)}/{len(dets)}")
    return kept


def nms_by_scene(detections: Sequence[Detection], iou_threshold: float = DEFAULT_NMS_IOU,
                 per_class: bool = False) -> Dict[str, List[Detection]]:
    """Scene-frame detections grouped by scene id, NMS applied per scene."""
    by_scene: Dict[str, List[Detection]] = {}
    for d in detections:
        by_scene.setdefault(d.scene_id or "", []).append(d)
    return {sid: nms(group, iou_threshold, per_class) for sid, group in sorted(by_scene.items())}
