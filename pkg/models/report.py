# models/report.py — detection/recognition confusion report
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List, Optional

from pydantic import BaseModel, Field, computed_field

from utils.errors import DataError, InvalidBackgroundCount, ShapeMismatch


@dataclass(frozen=True)
class Match:
    gt_index: int
    det_index: int
    gt_class: int
    pred_class: int
    iou: float


@dataclass
class Assignment:
    """Outcome of greedy matching for one scene (or several, concatenated)."""

    gt_classes: List[int] = field(default_factory=list)
    det_classes: List[int] = field(default_factory=list)
    matches: List[Match] = field(default_factory=list)
    missed: List[int] = field(default_factory=list)       # gt indices with no detection
    unmatched: List[int] = field(default_factory=list)    # det indices, the false positives

    @property
    def true_positives(self) -> int:
        return sum(1 for m in self.matches if m.gt_class == m.pred_class)


def _pct(num: int, den: int) -> Optional[float]:
    return None if den == 0 else 100.0 * num / den


def _mean(values: List[Optional[float]]) -> Optional[float]:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


class EvalReport(BaseModel):
    """Counts matrix[gt][pred], last column "None" (missed targets).

    Rates are percentages; a class without ground truth has undefined (None)
    ACC/FNR and is left out of the averages.
    """

    classes: List[str]
    matrix: List[List[int]]
    false_positives: int = Field(default=0, ge=0)
    fp_by_class: List[int] = Field(default_factory=list)
    background_units: Optional[int] = Field(default=None, ge=0)

    @computed_field
    @property
    def gt_counts(self) -> List[int]:
        return [sum(row) for row in self.matrix]

    @computed_field
    @property
    def tp(self) -> List[int]:
        return [self.matrix[c][c] for c in range(len(self.classes))]

    @computed_field
    @property
    def fn(self) -> List[int]:
        return [g - t for g, t in zip(self.gt_counts, self.tp)]

    @computed_field
    @property
    def acc(self) -> List[Optional[float]]:
        return [_pct(t, g) for t, g in zip(self.tp, self.gt_counts)]

    @computed_field
    @property
    def fnr(self) -> List[Optional[float]]:
        return [_pct(f, g) for f, g in zip(self.fn, self.gt_counts)]

    @computed_field
    @property
    def avg_acc(self) -> Optional[float]:
        return _mean(self.acc)

    @computed_field
    @property
    def avg_fnr(self) -> Optional[float]:
        return _mean(self.fnr)

    @computed_field
    @property
    def pooled_acc(self) -> Optional[float]:
        return _pct(sum(self.tp), sum(self.gt_counts))

    @computed_field
    @property
    def pooled_fnr(self) -> Optional[float]:
        return _pct(sum(self.fn), sum(self.gt_counts))

    @computed_field
    @property
    def tn(self) -> Optional[int]:
        if self.background_units is None:
            return None
        return self.background_units - self.false_positives

    @computed_field
    @property
    def fpr(self) -> Optional[float]:
        # FP / (TN + FP) with TN = background_units - FP
        if self.false_positives == 0:
            return 0.0
        if self.background_units is None:
            return None
        return 100.0 * self.false_positives / self.background_units

    def model_post_init(self, context: Any) -> None:
        n = len(self.classes)
        if len(self.matrix) != n or any(len(row) != n + 1 for row in self.matrix):
            raise ShapeMismatch(f"matrix must be {n}x{n + 1}")
        if not self.fp_by_class:
            self.fp_by_class = [0] * n
        if self.background_units is not None and self.background_units < self.false_positives:
            raise InvalidBackgroundCount(
                f"background_units={self.background_units} is smaller than FP={self.false_positives}"
            )

    def normalized(self) -> List[List[float]]:
        """Row fractions: each gt row over its count (zero rows stay zero)."""
        return [[v / g if g else 0.0 for v in row] for row, g in zip(self.matrix, self.gt_counts)]

    def merged(self, other: "EvalReport") -> "EvalReport":
        if self.classes != other.classes:
            raise DataError("cannot merge reports over different class tables")
        bg = None
        if self.background_units is not None and other.background_units is not None:
            bg = self.background_units + other.background_units
        return EvalReport(
            classes=list(self.classes),
            matrix=[[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.matrix, other.matrix)],
            false_positives=self.false_positives + other.false_positives,
            fp_by_class=[a + b for a, b in zip(self.fp_by_class, other.fp_by_class)],
            background_units=bg,
        )

    @classmethod
    def empty(cls, classes: List[str], background_units: Optional[int] = None) -> "EvalReport":
        n = len(classes)
        return cls(classes=list(classes), matrix=[[0] * (n + 1) for _ in range(n)],
                   background_units=background_units)
