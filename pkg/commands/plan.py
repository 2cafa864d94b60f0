# commands/plan.py — seeded placement plan for compositing chips into one scene
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click

from adaptors.manifests import read_chip_manifest, save_plan
from adaptors.raster_io import read_mask, read_raster
from commands.common import Runtime, emit_json, pass_runtime
from services.synth_service import plan_placements
from utils.text import safe_stem


def _parse_requests(values: Tuple[str, ...]) -> Dict[str, int]:
    out = {}
    for v in values:
        name, sep, count = v.partition("=")
        if not sep or not count.strip().isdigit():
            raise click.BadParameter(f"expected CLASS=COUNT, got {v!r}", param_hint="--request")
        out[name.strip()] = int(count)
    return out


@click.command("plan")
@click.argument("scene", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--chips", "chips_manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="chip manifest; its chips form the per-class pool")
@click.option("--count", type=click.IntRange(min=0), default=5, show_default=True,
              help="placements per class present in the manifest")
@click.option("--request", "requests", multiple=True, help="CLASS=COUNT, overrides --count for one class")
@click.option("--exclusion", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="obstacle mask (foreground = forbidden), same size as the scene")
@click.option("--seed", type=int, default=None, help="default: [seeds].plan of the config")
@click.option("--scene-id", default=None, help="default: scene file stem")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@pass_runtime
def command(rt: Runtime, scene: Path, chips_manifest: Path, count: int, requests: Tuple[str, ...],
            exclusion: Optional[Path], seed: Optional[int], scene_id: Optional[str], out_path: Path) -> None:
    cfg = rt.config
    seed = cfg.seeds.plan if seed is None else seed
    img = read_raster(scene)
    mask = read_mask(exclusion) if exclusion is not None else None

    pool: Dict[int, List[str]] = {}
    dims: Dict[str, Tuple[int, int]] = {}
    for e in read_chip_manifest(chips_manifest):
        chip = read_raster(e["image"])
        dims[e["image"]] = (chip.width, chip.height)
        pool.setdefault(cfg.class_id(e["class"]), []).append(e["image"])
    wanted = {cid: count for cid in pool}
    for name, n in _parse_requests(requests).items():
        wanted[cfg.class_id(name)] = n

    plan = plan_placements((img.width, img.height), mask, wanted, chip_dims=dims, seed=seed,
                           max_attempts=cfg.synth.max_attempts, chip_pool=pool,
                           scene_id=scene_id or safe_stem(scene.stem))
    save_plan(plan, out_path)
    rt.meta(out_path.parent, "plan", {"scene": scene, "chips": chips_manifest, "count": count,
                                      "requests": sorted(requests), "exclusion": exclusion,
                                      "out": out_path}, seeds={"plan": seed})
    emit_json({"plan": str(out_path), "placements": len(plan.entries), "seed": seed})
