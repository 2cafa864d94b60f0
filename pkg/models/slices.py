# models/slices.py — tiled windows and the index that maps them back to scenes
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from models.boxes import LabeledBox


class SliceRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    scene_id: str
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    offset: Tuple[int, int]
    size: Tuple[int, int]
    stride: int = Field(gt=0)
    window: int = Field(gt=0)
    labels: List[LabeledBox] = Field(min_length=1)

    @property
    def name(self) -> str:
        return slice_name(self.scene_id, self.i, self.j)

    def to_scene(self, box: LabeledBox) -> LabeledBox:
        return box.translated(self.offset[0], self.offset[1])


def slice_name(scene_id: str, i: int, j: int, window: Optional[int] = None) -> str:
    if window is None:
        return f"{scene_id}_{i}_{j}"
    return f"{scene_id}_{window}_{i}_{j}"


class SliceIndexEntry(BaseModel):
    scene_id: str
    i: int
    j: int
    offset: Tuple[int, int]
    size: Tuple[int, int]
    stride: int
    window: int


class SliceIndex(BaseModel):
    """Slice name → placement in its scene, plus per-scene background window counts."""

    slices: Dict[str, SliceIndexEntry] = Field(default_factory=dict)
    background_windows: Dict[str, int] = Field(default_factory=dict)

    def add(self, name: str, rec: SliceRecord) -> None:
        self.slices[name] = SliceIndexEntry(
            scene_id=rec.scene_id, i=rec.i, j=rec.j, offset=rec.offset,
            size=rec.size, stride=rec.stride, window=rec.window,
        )
