# models/plan.py — where each target chip goes in a large scene
from __future__ import annotations

from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field


class PlacementEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    chip_id: str
    class_id: int = Field(ge=0)
    x: int = Field(ge=0)
    y: int = Field(ge=0)
    chip_w: int = Field(gt=0)
    chip_h: int = Field(gt=0)

    @property
    def rect(self) -> Tuple[int, int, int, int]:
        return self.x, self.y, self.chip_w, self.chip_h

    def overlaps(self, other: "PlacementEntry") -> bool:
        return (self.x < other.x + other.chip_w and other.x < self.x + self.chip_w
                and self.y < other.y + other.chip_h and other.y < self.y + self.chip_h)


class PlacementPlan(BaseModel):
    scene_id: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    rng_seed: int
    entries: List[PlacementEntry] = Field(default_factory=list)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.width, self.height

    def counts(self) -> dict:
        out: dict = {}
        for e in self.entries:
            out[e.class_id] = out.get(e.class_id, 0) + 1
        return out
