# services/eval_service.py — greedy matching, confusion counts and ACC / FNR / FPR
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from models.boxes import Detection, LabeledBox
from models.report import Assignment, EvalReport, Match
from services.detect_service import iou_matrix
from utils.errors import DataError
from utils.log import dbg
from utils.parallel import parallel_map

DEFAULT_IOU_MIN = 0.5
UNDEFINED = "n/a"


def _dbg(tag: str, val: object) -> None:
    dbg("eval", tag, val)


def _gt_rank(gt: Sequence[LabeledBox]) -> np.ndarray:
    """Position of each gt box in lexicographic (x, y, w, h, class) order."""
    order = sorted(range(len(gt)), key=lambda k: (gt[k].x, gt[k].y, gt[k].w, gt[k].h, gt[k].class_id))
    rank = np.empty(len(gt), dtype=np.int64)
    rank[order] = np.arange(len(gt))
    return rank


def match_detections(gt: Sequence[LabeledBox], det: Sequence[Detection],
                     iou_min: float = DEFAULT_IOU_MIN) -> Assignment:
    """Greedy by confidence: each detection takes the free gt box (any class) with the largest IoU ≥ iou_min.

    Equal IoUs go to the gt box first in lexicographic box order.
    """
    gt, det = list(gt), list(det)
    out = Assignment(gt_classes=[b.class_id for b in gt], det_classes=[d.class_id for d in det])
    ious = iou_matrix(det, gt)
    rank = _gt_rank(gt)
    taken = np.zeros(len(gt), dtype=bool)

    for k in sorted(range(len(det)), key=lambda k: det[k].sort_key()):
        if not len(gt):
            out.unmatched.append(k)
            continue
        row = np.where(taken, -1.0, ious[k])
        best = row.max()
        if best < iou_min:
            out.unmatched.append(k)
            continue
        cands = np.flatnonzero(row == best)
        g = int(cands[np.argmin(rank[cands])])
        taken[g] = True
        out.matches.append(Match(gt_index=g, det_index=k, gt_class=gt[g].class_id,
                                 pred_class=det[k].class_id, iou=float(best)))

    out.missed = [int(g) for g in np.flatnonzero(~taken)]
    out.unmatched.sort()
    _dbg("assignment", f"{len(out.matches)} matched, {len(out.missed)} missed, {len(out.unmatched)} FP")
    return out


def metrics(assignment: Assignment, background_units: Optional[int] = None,
            classes: Optional[Sequence[str]] = None) -> EvalReport:
    """Confusion counts from an assignment; wrong-class matches and misses both count as FN."""
    ids = assignment.gt_classes + assignment.det_classes
    if classes is None:
        n = (max(ids) + 1) if ids else 0
        classes = [str(c) for c in range(n)]
    n = len(classes)
    if any(c >= n for c in ids):
        raise DataError(f"class id outside the {n}-class table")

    report = EvalReport.empty(list(classes))
    for m in assignment.matches:
        report.matrix[m.gt_class][m.pred_class] += 1
    for g in assignment.missed:
        report.matrix[assignment.gt_classes[g]][n] += 1
    fp_by_class = [0] * n
    for k in assignment.unmatched:
        fp_by_class[assignment.det_classes[k]] += 1
    return EvalReport(classes=report.classes, matrix=report.matrix,
                      false_positives=len(assignment.unmatched), fp_by_class=fp_by_class,
                      background_units=background_units)


def evaluate(gt: Sequence[LabeledBox], det: Sequence[Detection], iou_min: float = DEFAULT_IOU_MIN,
             background_units: Optional[int] = None, classes: Optional[Sequence[str]] = None) -> EvalReport:
    return metrics(match_detections(gt, det, iou_min), background_units, classes)


def evaluate_scenes(gt_by_scene: Mapping[str, Sequence[LabeledBox]],
                    det_by_scene: Mapping[str, Sequence[Detection]],
                    classes: Sequence[str],
                    iou_min: float = DEFAULT_IOU_MIN,
                    background_by_scene: Optional[Mapping[str, int]] = None,
                    workers: Optional[int] = None) -> EvalReport:
    """Evaluate each scene independently and merge by adding counts."""
    scenes = sorted(set(gt_by_scene) | set(det_by_scene))
    bg = background_by_scene

    def one(sid: str) -> EvalReport:
        units = None if bg is None else bg.get(sid)
        return evaluate(gt_by_scene.get(sid, []), det_by_scene.get(sid, []), iou_min, units, classes)

    report = EvalReport.empty(list(classes), 0 if bg is not None else None)
    for part in parallel_map(one, scenes, workers):
        report = report.merged(part)
    return report


# ——— Rendering ———
def _fmt(v: Optional[float]) -> str:
    return UNDEFINED if v is None else f"{v:.2f}"


def confusion_frame(report: EvalReport, normalized: bool = False) -> pd.DataFrame:
    """classes × (classes + None + ACC(%) + FNR(%)), then Average and Pooled rows."""
    cols = ["class", *report.classes, "None", "ACC(%)", "FNR(%)"]
    if not report.classes:
        return pd.DataFrame(columns=cols)
    cells = report.normalized() if normalized else report.matrix
    rows: List[Dict[str, object]] = []
    for c, name in enumerate(report.classes):
        row: Dict[str, object] = {"class": name}
        for k, head in enumerate([*report.classes, "None"]):
            row[head] = f"{cells[c][k]:.4f}" if normalized else str(cells[c][k])
        row["ACC(%)"] = _fmt(report.acc[c])
        row["FNR(%)"] = _fmt(report.fnr[c])
        rows.append(row)
    blank = {head: "" for head in [*report.classes, "None"]}
    rows.append({"class": "Average", **blank, "ACC(%)": _fmt(report.avg_acc), "FNR(%)": _fmt(report.avg_fnr)})
    rows.append({"class": "Pooled", **blank, "ACC(%)": _fmt(report.pooled_acc), "FNR(%)": _fmt(report.pooled_fnr)})
    return pd.DataFrame(rows, columns=cols)


def confusion_to_table(report: EvalReport, normalized: bool = False) -> str:
    """Aligned plain-text table; a report with no classes renders as its header line only."""
    df = confusion_frame(report, normalized)
    if df.empty:
        return "  ".join(df.columns)
    text = df.to_string(index=False)
    return f"{text}\nFP: {report.false_positives}  FPR(%): {_fmt(report.fpr)}"


def from_confusion(classes: Sequence[str], matrix: Sequence[Sequence[int]], false_positives: int = 0,
                   background_units: Optional[int] = None) -> EvalReport:
    """Report straight from recorded counts (rows: gt class, columns: predicted classes then None)."""
    return EvalReport(classes=list(classes), matrix=[list(map(int, r)) for r in matrix],
                      false_positives=false_positives, background_units=background_units)
