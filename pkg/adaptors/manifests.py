# adaptors/manifests.py — JSON Lines manifests, plan files and atomic JSON writes
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Union

from pydantic import ValidationError

from models.plan import PlacementPlan
from utils.errors import ManifestError
from utils.log import dbg

PathLike = Union[str, Path]


def _dbg(tag: str, val: object) -> None:
    dbg("io", tag, val)


def save_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)
    return path


def load_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ManifestError(f"file not found: {path}") from exc
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not raw.strip():
        raise ManifestError(f"{path} is empty")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    """Records of a JSON Lines file; blank lines are skipped."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as exc:
        raise ManifestError(f"manifest not found: {path}") from exc
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    out: List[Dict[str, Any]] = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:{n}: {exc.msg}") from exc
        if not isinstance(rec, dict):
            raise ManifestError(f"{path}:{n}: expected an object")
        out.append(rec)
    _dbg("read", f"{path} ({len(out)} records)")
    return out


def write_jsonl(records: Iterable[Mapping[str, Any]], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            f.write("\n")
    os.replace(tmp, path)
    return path


def read_chip_manifest(path: PathLike) -> List[Dict[str, str]]:
    """{"image", "class"} records; relative image paths resolve against the manifest's folder."""
    base = Path(path).parent
    out = []
    for n, rec in enumerate(read_jsonl(path), start=1):
        if "image" not in rec or "class" not in rec:
            raise ManifestError(f"{path}:{n}: needs 'image' and 'class'")
        image = Path(str(rec["image"]))
        if not image.is_absolute():
            image = base / image
        out.append({**rec, "image": str(image), "class": str(rec["class"])})
    return out


# ——— Plans and scene manifests ———
def save_plan(plan: PlacementPlan, path: PathLike) -> Path:
    return save_json(plan.model_dump(mode="json"), path)


def load_plan(path: PathLike) -> PlacementPlan:
    try:
        return PlacementPlan.model_validate(load_json(path))
    except ValidationError as exc:
        raise ManifestError(f"{path}: not a placement plan ({exc.error_count()} error(s))") from exc


def scene_manifest(scene: PathLike, labels: PathLike, seed: int) -> Dict[str, Any]:
    return {"scene": str(scene), "labels": str(labels), "seed": int(seed)}
