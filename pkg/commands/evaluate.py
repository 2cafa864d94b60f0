# commands/evaluate.py — detections (scene or slice frame) vs ground truth → confusion report, optional ACC gate
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional

import click

from adaptors.annotations import box_from_record, load_slice_index, read_detections
from adaptors.manifests import read_jsonl, save_json
from commands.common import Runtime, pass_runtime
from models.boxes import Detection, LabeledBox
from models.report import EvalReport
from services.detect_service import map_to_scene
from services.eval_service import confusion_to_table, evaluate_scenes
from utils.errors import AcceptanceGateFailed


def _gt_by_scene(path: Path, resolve) -> Dict[str, List[LabeledBox]]:
    out: Dict[str, List[LabeledBox]] = {}
    for rec in read_jsonl(path):
        sid = str(rec.get("scene") or Path(str(rec.get("image", ""))).stem)
        out.setdefault(sid, []).append(box_from_record(rec, resolve))
    return out


@click.command("eval")
@click.argument("detections", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("ground_truth", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--iou-min", type=click.FloatRange(0.0, 1.0), default=None, help="default: [eval].iou_min")
@click.option("--background", type=click.IntRange(min=0), default=None,
              help="background window count for FPR (overrides the slice index)")
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="slice index; maps slice-frame detections and supplies background window counts")
@click.option("--min-acc", type=click.FloatRange(0.0, 100.0), default=None,
              help="exit 3 when the average ACC (%) falls below this")
@click.option("--normalized", is_flag=True, help="print row fractions instead of counts")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="report JSON")
@pass_runtime
def command(rt: Runtime, detections: Path, ground_truth: Path, iou_min: Optional[float],
            background: Optional[int], index_path: Optional[Path], min_acc: Optional[float],
            normalized: bool, out_path: Optional[Path]) -> None:
    cfg = rt.config
    iou_min = cfg.eval.iou_min if iou_min is None else iou_min
    gt = _gt_by_scene(ground_truth, cfg.class_id)

    index = load_slice_index(index_path) if index_path is not None else None
    dets: Dict[str, List[Detection]] = {}
    for d in read_detections(detections, index, cfg.class_id):
        d = d if d.source is None else map_to_scene(d)
        dets.setdefault(d.scene_id or "", []).append(d)

    bg = dict(index.background_windows) if index is not None else None
    report = evaluate_scenes(gt, dets, cfg.class_names, iou_min, bg, rt.workers)
    if background is not None:
        report = EvalReport(classes=report.classes, matrix=report.matrix,
                            false_positives=report.false_positives, fp_by_class=report.fp_by_class,
                            background_units=background)

    click.echo(confusion_to_table(report, normalized))
    meta_dir = (out_path.parent if out_path else detections.parent)
    if out_path is not None:
        save_json({**report.model_dump(mode="json"), "normalized": report.normalized()}, out_path)
    rt.meta(meta_dir, "eval", {"detections": detections, "ground_truth": ground_truth, "iou_min": iou_min,
                               "background": background, "index": index_path, "min_acc": min_acc})

    if min_acc is not None and (report.avg_acc is None or report.avg_acc < min_acc):
        raise AcceptanceGateFailed(f"average ACC {report.avg_acc} below gate {min_acc}")
