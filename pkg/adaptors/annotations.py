# adaptors/annotations.py — label / detection records, normalized text annotations, slice index
from __future__ import annotations

from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

from pydantic import ValidationError

from adaptors.manifests import load_json, read_jsonl, save_json, write_jsonl
from models.boxes import Detection, LabeledBox, SliceRef
from models.slices import SliceIndex
from utils.errors import DataError, ManifestError, UnknownSlice

PathLike = Union[str, Path]
ClassResolver = Callable[[Union[str, int]], int]


def _num(v: float) -> Union[int, float]:
    return int(v) if float(v).is_integer() else float(v)


def _class_id(value: Any, resolve: Optional[ClassResolver]) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, str) and value.isdigit() and resolve is None:
        return int(value)
    if resolve is None:
        raise ManifestError(f"class {value!r} needs a class table")
    return resolve(value)


# ——— Ground-truth labels ———
def label_record(image: str, class_name: str, box: LabeledBox) -> Dict[str, Any]:
    return {"image": image, "class": class_name, "class_id": box.class_id,
            "x": _num(box.x), "y": _num(box.y), "w": _num(box.w), "h": _num(box.h)}


def box_from_record(rec: Mapping[str, Any], resolve: Optional[ClassResolver] = None) -> LabeledBox:
    try:
        cid = rec["class_id"] if "class_id" in rec else _class_id(rec["class"], resolve)
        return LabeledBox(class_id=int(cid), x=rec["x"], y=rec["y"], w=rec["w"], h=rec["h"])
    except KeyError as exc:
        raise ManifestError(f"label record misses {exc}") from exc
    except ValidationError as exc:
        raise ManifestError(f"invalid label record: {exc.errors()[0]['msg']}") from exc


def read_labels(path: PathLike, resolve: Optional[ClassResolver] = None) -> Dict[str, List[LabeledBox]]:
    """image → boxes, in file order."""
    out: Dict[str, List[LabeledBox]] = {}
    for rec in read_jsonl(path):
        out.setdefault(str(rec.get("image", "")), []).append(box_from_record(rec, resolve))
    return out


def write_labels(records: Sequence[Mapping[str, Any]], path: PathLike) -> Path:
    return write_jsonl(records, path)


# ——— Normalized text ("class_id cx cy w h") ———
def yolo_lines(boxes: Sequence[LabeledBox], width: int, height: int) -> List[str]:
    lines = []
    for b in boxes:
        cx, cy, w, h = b.to_yolo(width, height)
        lines.append(f"{b.class_id} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}")
    return lines


def write_yolo(boxes: Sequence[LabeledBox], width: int, height: int, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = yolo_lines(boxes, width, height)
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return path


def read_yolo(path: PathLike, width: int, height: int) -> List[LabeledBox]:
    out = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise ManifestError(f"{path}:{n}: expected 5 fields")
        cid, cx, cy, w, h = int(parts[0]), *map(float, parts[1:])
        out.append(LabeledBox(class_id=cid, x=(cx - w / 2) * width, y=(cy - h / 2) * height,
                              w=w * width, h=h * height))
    return out


# ——— Detections ———
def detection_record(d: Detection) -> Dict[str, Any]:
    rec: Dict[str, Any] = {"class": d.class_id, "x": _num(d.x), "y": _num(d.y),
                           "w": _num(d.w), "h": _num(d.h), "conf": d.confidence}
    if d.source is not None:
        rec["slice"] = d.source.name
    else:
        rec["scene"] = d.scene_id
    return rec


def detection_from_record(rec: Mapping[str, Any], index: Optional[SliceIndex] = None,
                          resolve: Optional[ClassResolver] = None) -> Detection:
    """Slice-frame records need the slice index to know their offset; scene-frame records do not."""
    try:
        fields = dict(class_id=_class_id(rec["class"], resolve), x=rec["x"], y=rec["y"],
                      w=rec["w"], h=rec["h"], confidence=rec["conf"])
    except KeyError as exc:
        raise ManifestError(f"detection record misses {exc}") from exc
    try:
        if "slice" in rec:
            name = str(rec["slice"])
            if index is None or name not in index.slices:
                raise UnknownSlice(f"slice {name!r} is not in the slice index")
            e = index.slices[name]
            return Detection(**fields, source=SliceRef(scene_id=e.scene_id, i=e.i, j=e.j,
                                                       stride=e.stride, name=name))
        if "scene" in rec:
            return Detection(**fields, scene_id=str(rec["scene"]))
    except ValidationError as exc:
        raise DataError(f"invalid detection: {exc.errors()[0]['msg']}") from exc
    raise ManifestError("detection record needs 'slice' or 'scene'")


def read_detections(path: PathLike, index: Optional[SliceIndex] = None,
                    resolve: Optional[ClassResolver] = None) -> List[Detection]:
    return [detection_from_record(r, index, resolve) for r in read_jsonl(path)]


def write_detections(dets: Sequence[Detection], path: PathLike) -> Path:
    return write_jsonl((detection_record(d) for d in dets), path)


# ——— Slice index ———
def save_slice_index(index: SliceIndex, path: PathLike) -> Path:
    return save_json(index.model_dump(mode="json"), path)


def load_slice_index(path: PathLike) -> SliceIndex:
    try:
        return SliceIndex.model_validate(load_json(path))
    except ValidationError as exc:
        raise ManifestError(f"{path}: not a slice index ({exc.error_count()} error(s))") from exc
