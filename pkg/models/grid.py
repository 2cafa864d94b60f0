# models/grid.py — S×S detector grids (targets and predictions) for the loss reference
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from utils.errors import ShapeMismatch


def _arr(value: Any, shape: Tuple[int, ...], name: str, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(value, dtype=dtype)
    if arr.shape != shape:
        raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


@dataclass
class GridTruth:
    """Per cell: object flag, responsible predictor, target box and one-hot class.

    `boxes[r, c]` is (x, y, w, h): x, y relative to the cell, w, h relative to
    the image. `responsible[r, c, b]` is set for at most one b, and only in
    object cells.
    """

    S: int
    B: int
    C: int
    obj: np.ndarray
    responsible: np.ndarray
    boxes: np.ndarray
    classes: np.ndarray
    collisions: List[Tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.S <= 0 or self.B <= 0 or self.C <= 0:
            raise ShapeMismatch("S, B and C must be positive")
        S, B, C = self.S, self.B, self.C
        self.obj = _arr(self.obj, (S, S), "obj", bool)
        self.responsible = _arr(self.responsible, (S, S, B), "responsible", bool)
        self.boxes = _arr(self.boxes, (S, S, 4), "boxes")
        self.classes = _arr(self.classes, (S, S, C), "classes")
        if (self.responsible.sum(axis=2) > 1).any():
            raise ShapeMismatch("more than one responsible predictor in a cell")
        if (self.responsible.any(axis=2) & ~self.obj).any():
            raise ShapeMismatch("responsible predictor outside an object cell")

    @classmethod
    def empty(cls, S: int, B: int, C: int) -> "GridTruth":
        return cls(S=S, B=B, C=C, obj=np.zeros((S, S), bool), responsible=np.zeros((S, S, B), bool),
                   boxes=np.zeros((S, S, 4)), classes=np.zeros((S, S, C)))

    def to_dict(self) -> Dict[str, Any]:
        return {"S": self.S, "B": self.B, "C": self.C, "obj": self.obj.tolist(),
                "responsible": self.responsible.tolist(), "boxes": self.boxes.tolist(),
                "classes": self.classes.tolist(), "collisions": [list(c) for c in self.collisions]}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "GridTruth":
        return cls(S=int(d["S"]), B=int(d["B"]), C=int(d["C"]), obj=d["obj"], responsible=d["responsible"],
                   boxes=d["boxes"], classes=d["classes"],
                   collisions=[tuple(c) for c in d.get("collisions", [])])


@dataclass
class GridPrediction:
    """`boxes[r, c, b]` = (x̂, ŷ, ŵ, ĥ, Ĉ); `classes[r, c]` = p̂ over C classes."""

    S: int
    B: int
    C: int
    boxes: np.ndarray
    classes: np.ndarray

    def __post_init__(self):
        if self.S <= 0 or self.B <= 0 or self.C <= 0:
            raise ShapeMismatch("S, B and C must be positive")
        self.boxes = _arr(self.boxes, (self.S, self.S, self.B, 5), "boxes")
        self.classes = _arr(self.classes, (self.S, self.S, self.C), "classes")
        conf = self.boxes[..., 4]
        if (conf < 0).any() or (conf > 1).any() or (self.classes < 0).any() or (self.classes > 1).any():
            raise ShapeMismatch("confidences and class scores must lie in [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        return {"S": self.S, "B": self.B, "C": self.C, "boxes": self.boxes.tolist(),
                "classes": self.classes.tolist()}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "GridPrediction":
        return cls(S=int(d["S"]), B=int(d["B"]), C=int(d["C"]), boxes=d["boxes"], classes=d["classes"])
