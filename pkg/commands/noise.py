# commands/noise.py — uniform-noise corrupted copies at one or more fractions
from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Tuple

import click

from adaptors.raster_io import read_raster, write_raster
from commands.common import Runtime, emit_json, list_images, pass_runtime
from services.gen_metrics_service import NOISE_LEVELS, inject_noise, sweep_seed
from utils.parallel import parallel_map


def _inputs(paths: Tuple[Path, ...]) -> List[Path]:
    out: List[Path] = []
    for p in paths:
        out.extend(list_images(p) if p.is_dir() else [p])
    return sorted(out)


def level_dir(fraction: float) -> str:
    return f"noise_{round(fraction * 100):02d}"


@click.command("noise")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--fraction", "fractions", multiple=True, type=click.FloatRange(0.0, 1.0),
              help="repeatable; default sweep 0.01 0.05 0.10 0.15 0.20")
@click.option("--seed", type=int, default=None, help="default: [seeds].noise of the config")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@pass_runtime
def command(rt: Runtime, inputs: Tuple[Path, ...], fractions: Tuple[float, ...], seed: Optional[int],
            out_dir: Path) -> None:
    seed = rt.config.seeds.noise if seed is None else seed
    levels = list(fractions) or list(NOISE_LEVELS)
    images = _inputs(inputs)

    jobs = [(f, k, p) for f in levels for k, p in enumerate(images)]

    def one(job: Tuple[float, int, Path]) -> str:
        fraction, k, path = job
        noisy = inject_noise(read_raster(path), fraction, sweep_seed(seed, fraction, k))
        return str(write_raster(noisy, out_dir / level_dir(fraction) / f"{path.stem}.png"))

    written = parallel_map(one, jobs, rt.workers)
    rt.meta(out_dir, "noise", {"inputs": [str(p) for p in images], "fractions": levels}, seeds={"noise": seed})
    emit_json({"images": len(images), "levels": [level_dir(f) for f in levels], "written": len(written)})
