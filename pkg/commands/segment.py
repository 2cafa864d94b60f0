# commands/segment.py — chips → object / object+shadow masks, per-class success summary
from __future__ import annotations

from pathlib import Path
from typing import Optional

import click

from adaptors.manifests import read_chip_manifest
from adaptors.raster_io import write_mask
from commands.common import Runtime, emit_table, pass_runtime, write_errors
from services.segmentation_service import batch_segment, compare_threshold_methods
from utils.errors import ConfigError


@click.command("segment")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="mask folder (default: next to each chip)")
@click.option("--suffix", default="_mask", show_default=True)
@click.option("--method", type=click.Choice(["percentile", "otsu", "compare"]), default="percentile",
              show_default=True, help="threshold rule; 'compare' reports both without writing masks")
@click.option("--no-shadow", is_flag=True, help="object masks only")
@pass_runtime
def command(rt: Runtime, manifest: Path, out_dir: Optional[Path], suffix: str, method: str,
            no_shadow: bool) -> None:
    entries = read_chip_manifest(manifest)
    params = {e["class"]: _params(rt, e["class"]) for e in entries}
    meta_dir = out_dir or manifest.parent

    if method == "compare":
        df = compare_threshold_methods(entries, params, workers=rt.workers)
        click.echo(df.to_string())
        rt.meta(meta_dir, "segment", {"manifest": manifest, "method": method})
        return

    params = {k: v.model_copy(update={"threshold_method": method}) for k, v in params.items()}
    run = batch_segment(entries, params, with_shadow=not no_shadow, workers=rt.workers)
    for res in run.results:
        if res.object_mask is None:
            continue
        image = Path(res.image)
        folder = out_dir or image.parent
        write_mask(res.object_mask, folder / f"{image.stem}{suffix}_object.png")
        if res.shadow_mask is not None:
            write_mask(res.shadow_mask, folder / f"{image.stem}{suffix}_shadow.png")

    summary = run.summary()
    meta_dir.mkdir(parents=True, exist_ok=True)
    summary.to_csv(meta_dir / "segment_summary.csv", index=False)
    write_errors(run.errors, meta_dir)
    rt.meta(meta_dir, "segment", {"manifest": manifest, "method": method, "suffix": suffix,
                                  "shadow": not no_shadow})
    emit_table(summary)


def _params(rt: Runtime, class_name: str):
    try:
        return rt.config.segmentation_for(class_name)
    except ConfigError:
        # classes outside the table fall back to the global settings
        return rt.config.segmentation
