# models/config.py — pipeline configuration (TOML), class table and per-class params
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import List, Optional

import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from models.params import DEFAULT_CLASS_FRACTIONS, AutoLabelParams, SegmentationParams
from utils.errors import ConfigError
from utils.text import normalize

CONFIG_ENV = "SARSCENE_CONFIG"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[1] / "data" / "pipeline.toml"


class ClassEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    name: str
    percentile_fraction: Optional[float] = Field(default=None, gt=0.0, lt=1.0)


class SlicerConfig(BaseModel):
    size: int = Field(default=1024, gt=0)
    stride: Optional[int] = Field(default=None, gt=0)


class NmsConfig(BaseModel):
    iou_threshold: float = Field(default=0.7, ge=0.0, le=1.0)
    per_class: bool = False


class EvalConfig(BaseModel):
    iou_min: float = Field(default=0.5, gt=0.0, le=1.0)


class SeedConfig(BaseModel):
    plan: int = 7
    noise: int = 0


class SynthConfig(BaseModel):
    max_attempts: int = Field(default=10_000, gt=0)
    darken: float = Field(default=0.0, ge=0.0, le=1.0)


def _default_classes() -> List[ClassEntry]:
    return [ClassEntry(id=k, name=name, percentile_fraction=frac)
            for k, (name, frac) in enumerate(DEFAULT_CLASS_FRACTIONS.items())]


class PipelineConfig(BaseModel):
    classes: List[ClassEntry] = Field(default_factory=_default_classes)
    segmentation: SegmentationParams = SegmentationParams()
    autolabel: AutoLabelParams = AutoLabelParams()
    slicer: SlicerConfig = SlicerConfig()
    nms: NmsConfig = NmsConfig()
    eval: EvalConfig = EvalConfig()
    seeds: SeedConfig = SeedConfig()
    synth: SynthConfig = SynthConfig()
    workers: Optional[int] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _dense_ids(self):
        ids = sorted(c.id for c in self.classes)
        if ids != list(range(len(ids))):
            raise ValueError(f"class ids must be dense from 0, got {ids}")
        keys = [normalize(c.name) for c in self.classes]
        if len(set(keys)) != len(keys):
            raise ValueError("class names must be unique")
        return self

    # ——— Class table ———
    @property
    def class_names(self) -> List[str]:
        return [c.name for c in sorted(self.classes, key=lambda c: c.id)]

    def class_entry(self, name: str) -> ClassEntry:
        key = normalize(name)
        for c in self.classes:
            if normalize(c.name) == key:
                return c
        raise ConfigError(f"unknown class {name!r}")

    def class_id(self, name: str) -> int:
        return self.class_entry(name).id

    def segmentation_for(self, name: str) -> SegmentationParams:
        frac = self.class_entry(name).percentile_fraction
        if frac is None:
            return self.segmentation
        return self.segmentation.model_copy(update={"percentile_fraction": frac})

    def autolabel_for(self, name: str) -> AutoLabelParams:
        return self.autolabel.model_copy(update={"binarize": self.segmentation_for(name)})

    # ——— Reproducibility ———
    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def resolve_config_path(flag: Optional[str] = None) -> Optional[Path]:
    """--config, then $SARSCENE_CONFIG, then data/pipeline.toml if present."""
    if flag:
        return Path(flag)
    env = os.getenv(CONFIG_ENV)
    if env:
        return Path(env)
    return DEFAULT_CONFIG_PATH if DEFAULT_CONFIG_PATH.exists() else None


def load_config(path: Optional[Path] = None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        raw = toml.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except toml.TomlDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return PipelineConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc.error_count()} invalid setting(s): {exc.errors()[0]['msg']}") from exc
