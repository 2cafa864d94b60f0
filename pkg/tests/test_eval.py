# tests/test_eval.py
from __future__ import annotations

from itertools import permutations
from typing import Dict, List, Tuple

import pytest

from models.boxes import Detection, LabeledBox
from models.report import EvalReport
from services.detect_service import iou
from services.eval_service import (
    confusion_frame, confusion_to_table, evaluate, evaluate_scenes, from_confusion, match_detections, metrics,
)
from utils.errors import DataError, InvalidBackgroundCount, ShapeMismatch

TEN_CLASSES = ["2S1", "BRDM2", "BTR60", "D7", "T62", "ZIL131", "ZSU234", "BMP2", "BTR70", "T72"]

# rows: ground truth; columns: predicted class in TEN_CLASSES order, then "None"
NO_AUGMENTATION = [
    [269, 0, 0, 0, 2, 3, 0, 0, 0, 0, 0],
    [0, 271, 0, 1, 0, 1, 1, 0, 0, 0, 0],
    [0, 1, 186, 0, 0, 0, 4, 0, 0, 0, 4],
    [0, 0, 0, 268, 0, 0, 6, 0, 0, 0, 0],
    [1, 0, 0, 0, 252, 0, 19, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 274, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 274, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 191, 0, 5, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 196, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 196, 0],
]

DARKENED = [
    [15, 0, 0, 0, 0],
    [0, 13, 0, 0, 2],
    [2, 0, 13, 0, 0],
    [1, 0, 0, 14, 0],
]


def replay(matrix: List[List[int]]) -> Tuple[Dict[str, List[LabeledBox]], Dict[str, List[Detection]]]:
    """Ground truth on a spaced grid, one scene per class; each counted cell becomes detections at gt positions."""
    gt: Dict[str, List[LabeledBox]] = {}
    det: Dict[str, List[Detection]] = {}
    n = len(matrix)
    for g, row in enumerate(matrix):
        sid = f"scene{g}"
        gt[sid], det[sid] = [], []
        k = 0
        for pred, count in enumerate(row):
            for _ in range(count):
                x, y = 40 * (k % 25), 40 * (k // 25)
                gt[sid].append(LabeledBox(class_id=g, x=x, y=y, w=20, h=20))
                if pred < n:
                    det[sid].append(Detection(class_id=pred, x=x, y=y, w=20, h=20, confidence=0.9,
                                              scene_id=sid))
                k += 1
    return gt, det


# ——— Metrics ———
def test_ten_class_table_percentages():
    report = from_confusion(TEN_CLASSES, NO_AUGMENTATION)
    acc = dict(zip(TEN_CLASSES, report.acc))
    fnr = dict(zip(TEN_CLASSES, report.fnr))
    assert acc["2S1"] == pytest.approx(98.18, abs=0.01) and fnr["2S1"] == pytest.approx(1.82, abs=0.01)
    assert acc["BRDM2"] == pytest.approx(98.91, abs=0.01)
    assert acc["BTR60"] == pytest.approx(95.38, abs=0.01)
    assert acc["D7"] == pytest.approx(97.81, abs=0.01)
    assert acc["T62"] == pytest.approx(92.31, abs=0.01) and fnr["T62"] == pytest.approx(7.69, abs=0.01)
    assert acc["BMP2"] == pytest.approx(97.45, abs=0.01)
    assert acc["ZIL131"] == acc["ZSU234"] == acc["BTR70"] == acc["T72"] == 100.0
    assert report.pooled_acc == pytest.approx(97.98, abs=0.01)
    assert report.pooled_fnr == pytest.approx(2.02, abs=0.01)
    assert sum(report.gt_counts) == 2426 and sum(report.tp) == 2377


def test_ten_class_table_replayed_through_matching():
    gt, det = replay(NO_AUGMENTATION)
    report = evaluate_scenes(gt, det, TEN_CLASSES, workers=4)
    assert report.matrix == NO_AUGMENTATION
    assert report.false_positives == 0
    assert report.fpr == 0.0


def test_darkened_scene_table():
    report = from_confusion(TEN_CLASSES[:4], DARKENED)
    assert report.acc == pytest.approx([100.0, 86.67, 86.67, 93.33], abs=0.01)
    assert report.avg_acc == pytest.approx(91.67, abs=0.01)
    assert report.pooled_acc == pytest.approx(91.67, abs=0.01)


def test_zero_detections():
    gt = [LabeledBox(class_id=0, x=30 * k, y=0, w=20, h=20) for k in range(274)]
    report = evaluate(gt, [], classes=["2S1"])
    assert report.matrix == [[0, 274]]
    assert (report.acc, report.fnr) == ([0.0], [100.0])


def test_perfect_detections():
    gt = [LabeledBox(class_id=k % 3, x=30 * k, y=5, w=20, h=20) for k in range(9)]
    det = [Detection(class_id=b.class_id, x=b.x, y=b.y, w=b.w, h=b.h, confidence=1.0) for b in gt]
    report = evaluate(gt, det, classes=["a", "b", "c"])
    assert report.matrix == [[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 3, 0]]
    assert report.false_positives == 0 and report.fn == [0, 0, 0]


def test_wrong_class_and_false_positive():
    gt = [LabeledBox(class_id=0, x=0, y=0, w=20, h=20), LabeledBox(class_id=1, x=100, y=0, w=20, h=20)]
    det = [Detection(class_id=1, x=1, y=0, w=20, h=20, confidence=0.9),
           Detection(class_id=0, x=300, y=300, w=20, h=20, confidence=0.8)]
    report = evaluate(gt, det, classes=["a", "b"], background_units=40)
    assert report.matrix == [[0, 1, 0], [0, 0, 1]]
    assert report.false_positives == 1 and report.fp_by_class == [1, 0]
    assert report.tn == 39
    assert report.fpr == pytest.approx(2.5)


def test_fpr_edge_cases():
    assert EvalReport.empty(["a"]).fpr == 0.0
    assert from_confusion(["a"], [[1, 0]], false_positives=2).fpr is None
    with pytest.raises(InvalidBackgroundCount):
        from_confusion(["a"], [[1, 0]], false_positives=5, background_units=4)


def test_class_without_ground_truth_is_left_out_of_the_average():
    report = from_confusion(["a", "b"], [[3, 0, 1], [0, 0, 0]])
    assert report.acc == [75.0, None]
    assert report.avg_acc == 75.0


def test_report_shape_and_merge_checks():
    with pytest.raises(ShapeMismatch):
        EvalReport(classes=["a", "b"], matrix=[[1, 0, 0]])
    with pytest.raises(DataError):
        EvalReport.empty(["a"]).merged(EvalReport.empty(["b"]))


def test_metrics_rejects_out_of_table_classes():
    gt = [LabeledBox(class_id=3, x=0, y=0, w=5, h=5)]
    with pytest.raises(DataError):
        metrics(match_detections(gt, []), classes=["a"])


# ——— Matching ———
def test_equal_overlap_goes_to_the_first_box():
    gt = [LabeledBox(class_id=1, x=20, y=0, w=20, h=20), LabeledBox(class_id=0, x=0, y=0, w=20, h=20)]
    det = [Detection(class_id=0, x=10, y=0, w=20, h=20, confidence=0.9)]
    out = match_detections(gt, det, iou_min=0.3)
    assert [m.gt_index for m in out.matches] == [1]
    assert out.missed == [0]


def test_higher_confidence_matches_first():
    gt = [LabeledBox(class_id=0, x=0, y=0, w=20, h=20)]
    det = [Detection(class_id=0, x=2, y=0, w=20, h=20, confidence=0.5),
           Detection(class_id=0, x=1, y=0, w=20, h=20, confidence=0.6)]
    out = match_detections(gt, det)
    assert [m.det_index for m in out.matches] == [1]
    assert out.unmatched == [0]


def _best_matching_size(gt, det, iou_min) -> int:
    k = min(len(gt), len(det))
    for size in range(k, 0, -1):
        for gts in permutations(range(len(gt)), size):
            for dets in permutations(range(len(det)), size):
                if all(iou(gt[g], det[d]) >= iou_min for g, d in zip(gts, dets)):
                    return size
    return 0


def test_greedy_matching_is_optimal_on_separated_instances(rng):
    for _ in range(60):
        n_gt, n_det = int(rng.integers(0, 5)), int(rng.integers(0, 5))
        gt = [LabeledBox(class_id=0, x=100 * k, y=0, w=30, h=30) for k in range(n_gt)]
        det = []
        for d in range(n_det):
            slot = int(rng.integers(0, 6))
            dx = int(rng.integers(-12, 13))
            det.append(Detection(class_id=0, x=100 * slot + dx, y=int(rng.integers(-5, 6)), w=30, h=30,
                                 confidence=round(float(rng.uniform(0.1, 1.0)), 3)))
        out = match_detections(gt, det)
        assert len(out.matches) == _best_matching_size(gt, det, 0.5)
        assert len(out.matches) + len(out.missed) == n_gt
        assert len(out.matches) + len(out.unmatched) == n_det


# ——— Rendering ———
def test_table_rendering():
    report = from_confusion(TEN_CLASSES, NO_AUGMENTATION, false_positives=0, background_units=100)
    text = confusion_to_table(report)
    assert "98.18" in text and "92.31" in text and "97.98" in text
    assert text.splitlines()[-1] == "FP: 0  FPR(%): 0.00"
    frame = confusion_frame(report)
    assert list(frame["class"])[-2:] == ["Average", "Pooled"]


def test_normalized_rows_sum_to_one():
    report = from_confusion(TEN_CLASSES, NO_AUGMENTATION)
    for row in report.normalized():
        assert sum(row) == pytest.approx(1.0)
    assert "0.9818" in confusion_to_table(report, normalized=True)


def test_empty_report_renders_header_only():
    assert confusion_to_table(EvalReport.empty([])) == "class  None  ACC(%)  FNR(%)"
