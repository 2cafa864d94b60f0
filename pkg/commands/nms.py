# commands/nms.py — slice-frame detections → scene frame, cross-slice suppression
from __future__ import annotations

from pathlib import Path
from typing import Optional

import click

from adaptors.annotations import load_slice_index, read_detections, write_detections
from commands.common import Runtime, emit_json, pass_runtime
from services.detect_service import map_to_scene, nms_by_scene


@click.command("nms")
@click.argument("detections", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="slice index, needed for slice-frame records")
@click.option("--iou", "iou_threshold", type=click.FloatRange(0.0, 1.0), default=None,
              help="suppression threshold (default: [nms].iou_threshold)")
@click.option("--per-class/--agnostic", default=None, help="default: [nms].per_class")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@pass_runtime
def command(rt: Runtime, detections: Path, index_path: Optional[Path], iou_threshold: Optional[float],
            per_class: Optional[bool], out_path: Path) -> None:
    cfg = rt.config
    iou_threshold = cfg.nms.iou_threshold if iou_threshold is None else iou_threshold
    per_class = cfg.nms.per_class if per_class is None else per_class
    index = load_slice_index(index_path) if index_path is not None else None

    dets = [d if d.source is None else map_to_scene(d) for d in read_detections(detections, index, cfg.class_id)]
    kept_by_scene = nms_by_scene(dets, iou_threshold, per_class)
    kept = [d for sid in sorted(kept_by_scene) for d in kept_by_scene[sid]]
    write_detections(kept, out_path)
    rt.meta(out_path.parent, "nms", {"detections": detections, "index": index_path, "iou": iou_threshold,
                                     "per_class": per_class, "out": out_path})
    emit_json({"input": len(dets), "kept": len(kept), "scenes": len(kept_by_scene)})
