# commands/slice.py — labeled scene → slices holding whole targets + slice index
from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Tuple

import click

from adaptors.annotations import load_slice_index, read_labels, save_slice_index, write_yolo
from adaptors.raster_io import read_raster, write_raster
from commands.common import Runtime, emit_json, pass_runtime
from models.slices import SliceIndex, slice_name
from services.slicer_service import (
    background_windows, build_index, crop_slice, default_stride, slice_sizes_default, slide, slide_multi,
)
from utils.text import safe_stem


@click.command("slice")
@click.argument("scene", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("labels", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--size", type=click.IntRange(min=1), default=None, help="window side (default: [slicer].size)")
@click.option("--stride", type=click.IntRange(min=1), default=None, help="default: [slicer].stride or size/2")
@click.option("--multi", "sizes", multiple=True, type=click.IntRange(min=1),
              help="tile at several sizes (repeatable); --multi-default uses 128/256/512/1024")
@click.option("--multi-default", is_flag=True)
@click.option("--scene-id", default=None, help="default: scene file stem")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@pass_runtime
def command(rt: Runtime, scene: Path, labels: Path, size: Optional[int], stride: Optional[int],
            sizes: Tuple[int, ...], multi_default: bool, scene_id: Optional[str], out_dir: Path) -> None:
    cfg = rt.config
    img = read_raster(scene)
    scene_id = scene_id or safe_stem(scene.stem)
    boxes = [b for group in read_labels(labels, resolve=cfg.class_id).values() for b in group]

    multi = list(slice_sizes_default()) if multi_default else list(sizes)
    if multi:
        records = slide_multi(img, boxes, multi, scene_id=scene_id)
        size = max(multi)
        stride = default_stride(size)
    else:
        if size is None:
            size = cfg.slicer.size
            stride = stride or cfg.slicer.stride or default_stride(size)
        else:
            stride = stride or default_stride(size)
        records = slide(img, boxes, size, stride, scene_id=scene_id)

    index_path = out_dir / "slice_index.json"
    index = load_slice_index(index_path) if index_path.exists() else SliceIndex()
    index = build_index(records, multi_size=len(multi) > 1, index=index)
    index.background_windows[scene_id] = background_windows(img.width, img.height, boxes, size, stride)

    written: List[str] = []
    for rec in records:
        name = slice_name(rec.scene_id, rec.i, rec.j, rec.window if len(multi) > 1 else None)
        write_raster(crop_slice(img, rec), out_dir / "images" / f"{name}.png")
        write_yolo(rec.labels, rec.size[0], rec.size[1], out_dir / "labels" / f"{name}.txt")
        written.append(name)
    save_slice_index(index, index_path)
    rt.meta(out_dir, "slice", {"scene": scene, "labels": labels, "size": size, "stride": stride,
                               "sizes": multi, "scene_id": scene_id})
    emit_json({"slices": len(written), "scene": scene_id, "index": str(index_path),
               "background_windows": index.background_windows[scene_id]})
