# commands/autolabel.py — chips → label records, normalized text annotations and an error-rate report
from __future__ import annotations

from pathlib import Path
from typing import Optional

import click

from adaptors.annotations import label_record, read_labels, write_labels, write_yolo
from adaptors.manifests import read_chip_manifest
from commands.common import Runtime, emit_table, pass_runtime, write_errors
from services.autolabel_service import batch_autolabel


@click.command("autolabel")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--references", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="reference label records; boxes with IoU < --iou-min count as not correctly labeled")
@click.option("--iou-min", type=click.FloatRange(0.0, 1.0), default=0.5, show_default=True)
@click.option("--yolo/--no-yolo", default=True, show_default=True, help="also write class_id cx cy w h files")
@pass_runtime
def command(rt: Runtime, manifest: Path, out_dir: Path, references: Optional[Path], iou_min: float,
            yolo: bool) -> None:
    cfg = rt.config
    entries = read_chip_manifest(manifest)
    refs = None
    if references is not None:
        by_image = read_labels(references, resolve=cfg.class_id)
        base = references.parent
        refs = {}
        for image, boxes in by_image.items():
            key = image if Path(image).is_absolute() else str(base / image)
            refs[key] = boxes[0]

    run = batch_autolabel(entries, cfg.class_id, cfg.autolabel_for, references=refs, iou_min=iou_min,
                          workers=rt.workers)

    records = []
    for o in sorted(run.labeled, key=lambda o: o.image):
        records.append(label_record(o.image, o.class_name, o.box))
        if yolo:
            write_yolo([o.box], o.width, o.height, out_dir / "labels" / f"{Path(o.image).stem}.txt")
    write_labels(records, out_dir / "labels.jsonl")
    report = run.report()
    report.to_csv(out_dir / "autolabel_report.csv", index=False)
    write_errors(run.errors, out_dir)
    rt.meta(out_dir, "autolabel", {"manifest": manifest, "references": references, "iou_min": iou_min,
                                   "yolo": yolo})
    emit_table(report)
