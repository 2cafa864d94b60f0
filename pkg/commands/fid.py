# commands/fid.py — Fréchet distance between two feature sets or two image folders
from __future__ import annotations

from pathlib import Path
from typing import Optional

import click

from adaptors.features_io import read_features
from adaptors.raster_io import read_raster
from commands.common import Runtime, emit_json, list_images, pass_runtime
from models.features import FeatureSet
from services.gen_metrics_service import features_of, fid
from utils.errors import TooFewSamples
from utils.parallel import parallel_map


def _load(path: Path, d_side: int, workers: Optional[int]) -> FeatureSet:
    if not path.is_dir():
        return read_features(path)
    images = list_images(path)
    if len(images) < 2:
        raise TooFewSamples(f"{path}: need at least 2 images, found {len(images)}")
    return features_of(parallel_map(read_raster, images, workers), d_side)


@click.command("fid")
@click.argument("real", type=click.Path(exists=True, path_type=Path))
@click.argument("generated", type=click.Path(exists=True, path_type=Path))
@click.option("--d-side", type=click.IntRange(min=1), default=8, show_default=True,
              help="baseline extractor grid side when comparing image folders")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="where run_meta.json goes (default: not written)")
@pass_runtime
def command(rt: Runtime, real: Path, generated: Path, d_side: int, out_dir: Optional[Path]) -> None:
    score = fid(_load(real, d_side, rt.workers), _load(generated, d_side, rt.workers))
    if out_dir is not None:
        rt.meta(out_dir, "fid", {"real": real, "generated": generated, "d_side": d_side})
    emit_json({"fid": score})
