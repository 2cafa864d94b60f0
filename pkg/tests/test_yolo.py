# tests/test_yolo.py
from __future__ import annotations

import json

import numpy as np
import pytest

from models.boxes import LabeledBox
from models.grid import GridPrediction, GridTruth
from services.yolo_service import (
    assign_cells, cell_of, class_confidence, yolo_loss, yolo_loss_grad, yolo_loss_terms,
)
from utils.errors import ShapeMismatch, UsageError


def _single_cell_truth() -> GridTruth:
    return GridTruth(S=1, B=1, C=1, obj=[[True]], responsible=[[[True]]],
                     boxes=[[[0.5, 0.5, 0.25, 0.25]]], classes=[[[1.0]]])


def _prediction_from_truth(truth: GridTruth) -> GridPrediction:
    boxes = np.zeros((truth.S, truth.S, truth.B, 5))
    boxes[..., :4] = truth.boxes[:, :, None, :]
    boxes[..., 4] = truth.responsible
    return GridPrediction(S=truth.S, B=truth.B, C=truth.C, boxes=boxes, classes=truth.classes.copy())


# ——— Loss ———
def test_single_cell_hand_value():
    pred = GridPrediction(S=1, B=1, C=1, boxes=[[[[0.6, 0.5, 0.16, 0.25, 0.8]]]], classes=[[[0.9]]])
    terms = yolo_loss_terms(pred, _single_cell_truth())
    assert terms.coord == pytest.approx(0.05)
    assert terms.size == pytest.approx(0.05)
    assert terms.obj == pytest.approx(0.04)
    assert terms.cls == pytest.approx(0.01)
    assert terms.noobj == 0.0
    assert terms.total == pytest.approx(0.15)
    assert not terms.clamped


def test_loss_is_zero_at_an_exact_match():
    truth = assign_cells([LabeledBox(class_id=1, x=10, y=20, w=30, h=40),
                          LabeledBox(class_id=0, x=300, y=250, w=60, h=50)], 7, (448, 448), B=2, C=3)
    assert yolo_loss(_prediction_from_truth(truth), truth) == 0.0


def test_loss_is_zero_without_objects():
    truth = GridTruth.empty(4, 2, 3)
    pred = GridPrediction(S=4, B=2, C=3, boxes=np.zeros((4, 4, 2, 5)), classes=np.full((4, 4, 3), 0.3))
    assert yolo_loss(pred, truth) == 0.0


def test_empty_cell_confidence_costs_the_noobj_weight():
    truth = GridTruth.empty(1, 1, 1)
    pred = GridPrediction(S=1, B=1, C=1, boxes=[[[[0.0, 0.0, 0.0, 0.0, 0.4]]]], classes=[[[0.0]]])
    assert yolo_loss(pred, truth) == pytest.approx(0.5 * 0.16)
    assert yolo_loss(pred, truth, lambda_noobj=1.0) == pytest.approx(0.16)


def _random_case(rng, S: int, B: int, C: int):
    obj = rng.random((S, S)) < 0.4
    responsible = np.zeros((S, S, B), dtype=bool)
    classes = np.zeros((S, S, C))
    for r, c in zip(*np.nonzero(obj)):
        responsible[r, c, rng.integers(0, B)] = True
        classes[r, c, rng.integers(0, C)] = 1.0
    truth = GridTruth(S=S, B=B, C=C, obj=obj, responsible=responsible,
                      boxes=rng.uniform(0.05, 0.95, size=(S, S, 4)), classes=classes)
    pred = GridPrediction(S=S, B=B, C=C, boxes=rng.uniform(0.05, 0.95, size=(S, S, B, 5)),
                          classes=rng.uniform(0.05, 0.95, size=(S, S, C)))
    return pred, truth


def test_loss_is_non_negative_and_sums_per_cell(rng):
    for _ in range(50):
        pred, truth = _random_case(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)), int(rng.integers(1, 4)))
        terms = yolo_loss_terms(pred, truth)
        assert terms.total >= 0.0
        assert terms.per_cell.sum() == pytest.approx(terms.total)
        assert terms.per_cell.shape == (truth.S, truth.S)


def test_gradient_matches_central_differences(rng):
    h = 1e-6
    for _ in range(100):
        pred, truth = _random_case(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 4)))
        g_boxes, g_classes = yolo_loss_grad(pred, truth)

        num_boxes = np.zeros_like(pred.boxes)
        for idx in np.ndindex(pred.boxes.shape):
            up, down = pred.boxes.copy(), pred.boxes.copy()
            up[idx] += h
            down[idx] -= h
            num_boxes[idx] = (yolo_loss(GridPrediction(pred.S, pred.B, pred.C, up, pred.classes), truth)
                              - yolo_loss(GridPrediction(pred.S, pred.B, pred.C, down, pred.classes), truth)) / (2 * h)
        num_classes = np.zeros_like(pred.classes)
        for idx in np.ndindex(pred.classes.shape):
            up, down = pred.classes.copy(), pred.classes.copy()
            up[idx] += h
            down[idx] -= h
            num_classes[idx] = (yolo_loss(GridPrediction(pred.S, pred.B, pred.C, pred.boxes, up), truth)
                                - yolo_loss(GridPrediction(pred.S, pred.B, pred.C, pred.boxes, down), truth)) / (2 * h)

        np.testing.assert_allclose(g_boxes, num_boxes, rtol=1e-5, atol=1e-7)
        np.testing.assert_allclose(g_classes, num_classes, rtol=1e-5, atol=1e-7)


def test_negative_size_is_clamped_and_flagged():
    pred = GridPrediction(S=1, B=1, C=1, boxes=[[[[0.5, 0.5, -0.1, 0.25, 1.0]]]], classes=[[[1.0]]])
    terms = yolo_loss_terms(pred, _single_cell_truth())
    assert terms.clamped
    assert terms.size == pytest.approx(5 * 0.25)
    g_boxes, _ = yolo_loss_grad(pred, _single_cell_truth())
    assert g_boxes[0, 0, 0, 2] == 0.0


def test_grid_shapes_must_agree():
    pred = GridPrediction(S=2, B=1, C=1, boxes=np.zeros((2, 2, 1, 5)), classes=np.zeros((2, 2, 1)))
    with pytest.raises(ShapeMismatch):
        yolo_loss(pred, _single_cell_truth())
    with pytest.raises(ShapeMismatch):
        GridPrediction(S=1, B=1, C=1, boxes=[[[[0.5, 0.5, 0.2, 0.2, 1.5]]]], classes=[[[1.0]]])


# ——— Responsibility ———
def test_center_box_lands_in_the_higher_cell():
    box = LabeledBox(class_id=0, x=40, y=40, w=20, h=20)
    assert cell_of(box, 2, 100, 100) == (1, 1)
    assert cell_of(LabeledBox(class_id=0, x=90, y=90, w=20, h=20), 2, 100, 100) == (1, 1)


def test_cell_arithmetic_on_a_seven_grid():
    box = LabeledBox(class_id=2, x=150, y=320, w=40, h=60)
    truth = assign_cells([box], 7, (700, 700))
    assert truth.obj[3, 1] and int(truth.obj.sum()) == 1
    assert truth.boxes[3, 1] == pytest.approx([0.7, 0.5, 40 / 700, 60 / 700])
    assert truth.classes[3, 1].tolist() == [0.0, 0.0, 1.0]
    assert truth.responsible[3, 1, 0]


def test_second_box_in_a_cell_is_dropped():
    boxes = [LabeledBox(class_id=0, x=10, y=10, w=20, h=20), LabeledBox(class_id=1, x=50, y=50, w=10, h=10)]
    truth = assign_cells(boxes, 1, (100, 100), C=2)
    assert truth.collisions == [(0, 0, 1)]
    assert truth.classes[0, 0].tolist() == [1.0, 0.0]


def test_responsible_predictor_has_the_best_overlap():
    box = LabeledBox(class_id=0, x=30, y=30, w=40, h=40)
    boxes = np.zeros((1, 1, 2, 5))
    boxes[0, 0, 0] = [0.1, 0.1, 0.05, 0.05, 0.5]
    boxes[0, 0, 1] = [0.5, 0.5, 0.4, 0.4, 0.5]
    pred = GridPrediction(S=1, B=2, C=1, boxes=boxes, classes=np.zeros((1, 1, 1)))
    truth = assign_cells([box], 1, (100, 100), B=2, C=1, predictions=pred)
    assert truth.responsible[0, 0].tolist() == [False, True]
    assert assign_cells([box], 1, (100, 100), B=2, C=1).responsible[0, 0].tolist() == [True, False]


def test_class_outside_the_grid_is_rejected():
    with pytest.raises(UsageError):
        assign_cells([LabeledBox(class_id=3, x=0, y=0, w=5, h=5)], 2, (10, 10), C=2)


# ——— Class confidence ———
def test_class_confidence():
    assert class_confidence(1.0, 0.8) == pytest.approx(0.8)
    assert class_confidence(0.5, 0.5) == pytest.approx(0.25)
    assert class_confidence(0.2, 0.9) < class_confidence(0.4, 0.9)
    with pytest.raises(UsageError):
        class_confidence(1.2, 0.5)


def test_grids_survive_json(rng):
    pred, truth = _random_case(rng, 3, 2, 2)
    truth.collisions.append((0, 1, 4))
    truth_back = GridTruth.from_dict(json.loads(json.dumps(truth.to_dict())))
    pred_back = GridPrediction.from_dict(json.loads(json.dumps(pred.to_dict())))
    assert truth_back.collisions == [(0, 1, 4)]
    assert yolo_loss(pred_back, truth_back) == yolo_loss(pred, truth)
    assert json.loads(json.dumps(yolo_loss_terms(pred, truth).to_dict()))["total"] == pytest.approx(
        yolo_loss(pred, truth))
