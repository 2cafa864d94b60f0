# models/boxes.py — ground-truth boxes and detections
from __future__ import annotations

from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class LabeledBox(BaseModel):
    """Axis-aligned pixel box (left, top, width, height) with a class id.

    Ground truth leaves `confidence` unset; detections always carry one.
    """

    model_config = ConfigDict(frozen=True)

    class_id: int = Field(ge=0)
    x: float
    y: float
    w: float = Field(gt=0)
    h: float = Field(gt=0)
    confidence: Optional[float] = Field(default=None, ge=0.0, le=1.0)

    @property
    def x_max(self) -> float:
        return self.x + self.w

    @property
    def y_max(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> Tuple[float, float]:
        return self.x + self.w / 2, self.y + self.h / 2

    @property
    def area(self) -> float:
        return self.w * self.h

    def translated(self, dx: float, dy: float) -> "LabeledBox":
        return self.model_copy(update={"x": self.x + dx, "y": self.y + dy})

    def inside(self, width: float, height: float) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x_max <= width and self.y_max <= height

    def clamped(self, width: float, height: float) -> "LabeledBox":
        x0, y0 = max(0.0, self.x), max(0.0, self.y)
        x1, y1 = min(float(width), self.x_max), min(float(height), self.y_max)
        return self.model_copy(update={"x": x0, "y": y0, "w": x1 - x0, "h": y1 - y0})

    def to_yolo(self, width: int, height: int) -> Tuple[float, float, float, float]:
        """Normalized (cx, cy, w, h) as detector trainers expect."""
        cx, cy = self.center
        return cx / width, cy / height, self.w / width, self.h / height


class SliceRef(BaseModel):
    """Where a slice-frame detection came from."""

    model_config = ConfigDict(frozen=True)

    scene_id: str
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    stride: int = Field(gt=0)
    name: Optional[str] = None


class Detection(LabeledBox):
    confidence: float = Field(ge=0.0, le=1.0)
    source: Optional[SliceRef] = None
    scene_id: Optional[str] = None

    def sort_key(self) -> Tuple[float, float, float, int]:
        # descending confidence, then (x, y, class_id)
        return (-self.confidence, self.x, self.y, self.class_id)
