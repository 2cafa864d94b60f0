# services/yolo_service.py — grid responsibility, class confidence and the sum-squared detection loss
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from models.boxes import LabeledBox
from models.grid import GridPrediction, GridTruth
from utils.errors import ShapeMismatch, UsageError
from utils.log import dbg, warn

LAMBDA_COORD = 5.0
LAMBDA_NOOBJ = 0.5


def _dbg(tag: str, val: object) -> None:
    dbg("yolo", tag, val)


# ——— Targets ———
def cell_of(box: LabeledBox, S: int, width: int, height: int) -> Tuple[int, int]:
    """(row, col) holding the box center; a center on a cell edge goes to the higher cell."""
    col = math.floor((2 * box.x + box.w) * S / (2 * width))
    row = math.floor((2 * box.y + box.h) * S / (2 * height))
    return min(max(row, 0), S - 1), min(max(col, 0), S - 1)


def _box_iou(a: np.ndarray, b: np.ndarray) -> float:
    """IoU of two (cx, cy, w, h) boxes in image-normalized units."""
    iw = min(a[0] + a[2] / 2, b[0] + b[2] / 2) - max(a[0] - a[2] / 2, b[0] - b[2] / 2)
    ih = min(a[1] + a[3] / 2, b[1] + b[3] / 2) - max(a[1] - a[3] / 2, b[1] - b[3] / 2)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a[2] * a[3] + b[2] * b[3] - inter
    return inter / union if union > 0 else 0.0


def _responsible(pred: Optional[GridPrediction], row: int, col: int, target: np.ndarray, S: int) -> int:
    if pred is None:
        return 0
    tgt = np.array([(col + target[0]) / S, (row + target[1]) / S, target[2], target[3]])
    best, best_iou = 0, -1.0
    for b in range(pred.B):
        x, y, w, h, _ = pred.boxes[row, col, b]
        score = _box_iou(np.array([(col + x) / S, (row + y) / S, max(w, 0.0), max(h, 0.0)]), tgt)
        if score > best_iou:
            best, best_iou = b, score
    return best


def assign_cells(boxes: Sequence[LabeledBox], S: int, image_dims: Tuple[int, int], B: int = 1,
                 C: Optional[int] = None, predictions: Optional[GridPrediction] = None) -> GridTruth:
    """One object per cell: the first box whose center falls in a cell owns it; later ones are dropped."""
    width, height = image_dims
    if C is None:
        C = max((b.class_id for b in boxes), default=0) + 1
    if predictions is not None and (predictions.S, predictions.B, predictions.C) != (S, B, C):
        raise ShapeMismatch("predictions do not match the requested grid")
    truth = GridTruth.empty(S, B, C)
    for k, box in enumerate(boxes):
        if box.class_id >= C:
            raise UsageError(f"class id {box.class_id} outside {C} classes")
        row, col = cell_of(box, S, width, height)
        if truth.obj[row, col]:
            truth.collisions.append((row, col, k))
            warn("yolo", "cell collision", f"box {k} dropped from cell ({row},{col})")
            continue
        cx, cy = box.center
        target = np.array([cx * S / width - col, cy * S / height - row, box.w / width, box.h / height])
        truth.obj[row, col] = True
        truth.boxes[row, col] = target
        truth.classes[row, col, box.class_id] = 1.0
        truth.responsible[row, col, _responsible(predictions, row, col, target, S)] = True
    _dbg("cells", f"{int(truth.obj.sum())} object cells, {len(truth.collisions)} collisions")
    return truth


def class_confidence(p_class: float, confidence: float) -> float:
    """Class-specific confidence: Pr(class | object) · Pr(object)·IoU."""
    if not (0.0 <= p_class <= 1.0 and 0.0 <= confidence <= 1.0):
        raise UsageError("both factors must lie in [0, 1]")
    return p_class * confidence


# ——— Loss ———
@dataclass
class LossBreakdown:
    coord: float
    size: float
    obj: float
    cls: float
    noobj: float
    per_cell: np.ndarray
    clamped: bool

    @property
    def total(self) -> float:
        return self.coord + self.size + self.obj + self.cls + self.noobj

    def to_dict(self) -> dict:
        return {"coord": self.coord, "size": self.size, "obj": self.obj, "cls": self.cls,
                "noobj": self.noobj, "total": self.total, "clamped": self.clamped,
                "per_cell": self.per_cell.tolist()}


def _check(pred: GridPrediction, truth: GridTruth) -> None:
    if (pred.S, pred.B, pred.C) != (truth.S, truth.B, truth.C):
        raise ShapeMismatch(f"prediction grid {(pred.S, pred.B, pred.C)} vs truth {(truth.S, truth.B, truth.C)}")


def _clamped_wh(pred: GridPrediction) -> Tuple[np.ndarray, np.ndarray, bool]:
    w, h = pred.boxes[..., 2], pred.boxes[..., 3]
    clamped = bool((w < 0).any() or (h < 0).any())
    if clamped:
        warn("yolo", "negative w/h", "clamped to 0 before the square root")
    return np.clip(w, 0.0, None), np.clip(h, 0.0, None), clamped


def yolo_loss_terms(pred: GridPrediction, truth: GridTruth, lambda_coord: float = LAMBDA_COORD,
                    lambda_noobj: float = LAMBDA_NOOBJ) -> LossBreakdown:
    _check(pred, truth)
    resp = truth.responsible.astype(np.float64)                    # (S,S,B)
    tgt = truth.boxes[:, :, None, :]                               # (S,S,1,4)
    pw, ph, clamped = _clamped_wh(pred)

    coord = lambda_coord * resp * ((tgt[..., 0] - pred.boxes[..., 0]) ** 2
                                   + (tgt[..., 1] - pred.boxes[..., 1]) ** 2)
    size = lambda_coord * resp * ((np.sqrt(tgt[..., 2]) - np.sqrt(pw)) ** 2
                                  + (np.sqrt(tgt[..., 3]) - np.sqrt(ph)) ** 2)
    conf = pred.boxes[..., 4]
    obj = resp * (1.0 - conf) ** 2
    noobj = lambda_noobj * (1.0 - resp) * conf ** 2
    cls = truth.obj * ((truth.classes - pred.classes) ** 2).sum(axis=2)

    per_cell = (coord + size + obj + noobj).sum(axis=2) + cls
    return LossBreakdown(coord=float(coord.sum()), size=float(size.sum()), obj=float(obj.sum()),
                         cls=float(cls.sum()), noobj=float(noobj.sum()), per_cell=per_cell, clamped=clamped)


def yolo_loss(pred: GridPrediction, truth: GridTruth, lambda_coord: float = LAMBDA_COORD,
              lambda_noobj: float = LAMBDA_NOOBJ) -> float:
    return yolo_loss_terms(pred, truth, lambda_coord, lambda_noobj).total


def yolo_loss_grad(pred: GridPrediction, truth: GridTruth, lambda_coord: float = LAMBDA_COORD,
                   lambda_noobj: float = LAMBDA_NOOBJ) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic d(loss)/d(pred): arrays shaped like `pred.boxes` and `pred.classes`.

    Where ŵ or ĥ is not positive the size derivative is reported as 0.
    """
    _check(pred, truth)
    resp = truth.responsible.astype(np.float64)
    tgt = truth.boxes[:, :, None, :]
    g_boxes = np.zeros_like(pred.boxes)

    g_boxes[..., 0] = -2.0 * lambda_coord * resp * (tgt[..., 0] - pred.boxes[..., 0])
    g_boxes[..., 1] = -2.0 * lambda_coord * resp * (tgt[..., 1] - pred.boxes[..., 1])
    for k in (2, 3):
        v = pred.boxes[..., k]
        pos = v > 0
        root = np.sqrt(np.where(pos, v, 1.0))
        g = -lambda_coord * resp * (np.sqrt(tgt[..., k]) - root) / root
        g_boxes[..., k] = np.where(pos, g, 0.0)
    conf = pred.boxes[..., 4]
    g_boxes[..., 4] = -2.0 * resp * (1.0 - conf) + 2.0 * lambda_noobj * (1.0 - resp) * conf

    g_classes = -2.0 * truth.obj[..., None] * (truth.classes - pred.classes)
    return g_boxes, g_classes
