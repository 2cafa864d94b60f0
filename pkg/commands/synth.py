# commands/synth.py — scene + plan + chips → labeled large-scene image
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click

from adaptors.annotations import label_record, write_labels
from adaptors.manifests import load_plan, read_chip_manifest, save_json, scene_manifest
from adaptors.raster_io import read_raster, write_raster
from commands.common import Runtime, emit_json, pass_runtime, write_errors
from models.boxes import LabeledBox
from models.raster import BinaryMask, GrayRaster
from services.autolabel_service import auto_label
from services.segmentation_service import segment_chip
from services.synth_service import synthesize_scene
from utils.errors import ManifestError, SarSceneError
from utils.log import warn
from utils.parallel import parallel_map


@click.command("synth")
@click.argument("scene", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("plan_path", metavar="PLAN", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--chips", "chips_manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--darken", type=click.FloatRange(0.0, 1.0), default=None,
              help="scale target intensities by (1 - darken); default: [synth].darken")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@pass_runtime
def command(rt: Runtime, scene: Path, plan_path: Path, chips_manifest: Path, darken: Optional[float],
            out_dir: Path) -> None:
    cfg = rt.config
    darken = cfg.synth.darken if darken is None else darken
    plan = load_plan(plan_path)
    class_of = {e["image"]: e["class"] for e in read_chip_manifest(chips_manifest)}

    def prepare(chip_id: str) -> Tuple[str, Optional[Tuple[GrayRaster, BinaryMask, LabeledBox]], Optional[Dict]]:
        try:
            if chip_id not in class_of:
                raise ManifestError(f"chip {chip_id!r} is not in the chip manifest")
            name = class_of[chip_id]
            chip = read_raster(chip_id)
            _, shadow = segment_chip(chip, cfg.segmentation_for(name), with_shadow=True)
            box = auto_label(chip, cfg.class_id(name), cfg.autolabel_for(name))
            return chip_id, (chip, shadow, box), None
        except SarSceneError as exc:
            return chip_id, None, {"image": chip_id, **exc.to_dict()}

    needed = sorted({e.chip_id for e in plan.entries})
    chips, boxes, errors = {}, {}, []
    for chip_id, prepared, err in parallel_map(prepare, needed, rt.workers):
        if prepared is None:
            errors.append(err)
            continue
        chip, shadow, box = prepared
        chips[chip_id] = (chip, shadow)
        boxes[chip_id] = box
    if errors:
        warn("synth", "chips skipped", len(errors))
        plan = plan.model_copy(update={"entries": [e for e in plan.entries if e.chip_id in chips]})

    img = read_raster(scene)
    out_img, labels = synthesize_scene(img, plan, chips, boxes=boxes, darken=darken, workers=rt.workers)

    scene_png = write_raster(out_img, out_dir / f"{plan.scene_id}.png")
    names = {c.id: c.name for c in cfg.classes}
    records: List[Dict] = []
    for entry, box in zip(plan.entries, labels):
        rec = label_record(scene_png.name, names.get(entry.class_id, str(entry.class_id)), box)
        rec["scene"] = plan.scene_id
        records.append(rec)
    labels_path = write_labels(records, out_dir / f"{plan.scene_id}_labels.jsonl")
    save_json(scene_manifest(scene_png.name, labels_path.name, plan.rng_seed), out_dir / "scene.json")
    write_errors(errors, out_dir)
    rt.meta(out_dir, "synth", {"scene": scene, "plan": plan_path, "chips": chips_manifest, "darken": darken},
            seeds={"plan": plan.rng_seed})
    emit_json({"scene": str(scene_png), "labels": str(labels_path), "targets": len(labels),
               "skipped": len(errors)})
