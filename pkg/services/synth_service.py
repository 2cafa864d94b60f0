# services/synth_service.py — place segmented chips into a large-scene background
from __future__ import annotations

from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from models.boxes import LabeledBox
from models.params import AutoLabelParams
from models.plan import PlacementEntry, PlacementPlan
from models.raster import BinaryMask, GrayRaster
from services.autolabel_service import auto_label
from services.raster_ops import compose
from utils.errors import PlacementExhausted, PlanSceneMismatch, ShapeMismatch, UsageError
from utils.log import dbg
from utils.parallel import parallel_map

DEFAULT_MAX_ATTEMPTS = 10_000

Dims = Tuple[int, int]


def _dbg(tag: str, val: object) -> None:
    dbg("synth", tag, val)


# ——— Planning ———
def _chip_queue(requests: Mapping[int, int], chip_pool: Optional[Mapping[int, Sequence[str]]],
                rng: np.random.Generator) -> List[Tuple[int, str]]:
    """(class_id, chip_id) in class order; pooled chips are shuffled once, then taken round robin."""
    queue: List[Tuple[int, str]] = []
    for class_id in sorted(requests):
        count = int(requests[class_id])
        if count < 0:
            raise UsageError(f"negative request for class {class_id}")
        pool = list((chip_pool or {}).get(class_id, []))
        if pool:
            pool = [pool[k] for k in rng.permutation(len(pool))]
        for k in range(count):
            chip_id = pool[k % len(pool)] if pool else f"{class_id}_{k}"
            queue.append((class_id, chip_id))
    return queue


def _dims_of(chip_dims: Union[Dims, Mapping[str, Dims]], chip_id: str) -> Dims:
    if isinstance(chip_dims, Mapping):
        if chip_id not in chip_dims:
            raise PlanSceneMismatch(f"no dimensions known for chip {chip_id!r}")
        return tuple(chip_dims[chip_id])
    return tuple(chip_dims)


def plan_placements(scene_dims: Dims,
                    exclusion: Optional[BinaryMask],
                    requests: Mapping[int, int],
                    chip_dims: Union[Dims, Mapping[str, Dims]] = (128, 128),
                    seed: int = 0,
                    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                    chip_pool: Optional[Mapping[int, Sequence[str]]] = None,
                    scene_id: str = "scene") -> PlacementPlan:
    """Rejection-sample non-overlapping chip rectangles fully inside the scene and clear of `exclusion`.

    Candidates are uniform top-left positions from `numpy.random.default_rng(seed)`;
    each placement gets up to `max_attempts` draws.
    """
    width, height = scene_dims
    if exclusion is not None and (exclusion.width, exclusion.height) != (width, height):
        raise ShapeMismatch(f"exclusion {exclusion.width}x{exclusion.height} vs scene {width}x{height}")
    rng = np.random.default_rng(seed)
    blocked = exclusion.data if exclusion is not None else None
    accepted: List[PlacementEntry] = []

    for class_id, chip_id in _chip_queue(requests, chip_pool, rng):
        cw, ch = _dims_of(chip_dims, chip_id)
        if cw > width or ch > height:
            raise PlacementExhausted(f"chip {chip_id!r} ({cw}x{ch}) does not fit in {width}x{height}")
        for _ in range(max_attempts):
            x = int(rng.integers(0, width - cw + 1))
            y = int(rng.integers(0, height - ch + 1))
            cand = PlacementEntry(chip_id=chip_id, class_id=class_id, x=x, y=y, chip_w=cw, chip_h=ch)
            if blocked is not None and blocked[y:y + ch, x:x + cw].any():
                continue
            if any(cand.overlaps(e) for e in accepted):
                continue
            accepted.append(cand)
            break
        else:
            raise PlacementExhausted(
                f"class {class_id}: no free position after {max_attempts} attempts ({len(accepted)} placed)"
            )
    _dbg("plan", f"{len(accepted)} placements, seed {seed}")
    return PlacementPlan(scene_id=scene_id, width=width, height=height, rng_seed=seed, entries=accepted)


# ——— Compositing ———
def darken_chip(chip: GrayRaster, factor: float) -> GrayRaster:
    """Scale every intensity by (1 - factor), rounded to nearest."""
    if not 0.0 <= factor <= 1.0:
        raise UsageError("darken must lie in [0, 1]")
    if factor == 0.0:
        return chip
    scaled = np.rint(chip.data.astype(np.float64) * (1.0 - factor))
    return GrayRaster(np.clip(scaled, 0, 255).astype(np.uint8))


def _check_entry(entry: PlacementEntry, plan: PlacementPlan,
                 chips: Mapping[str, Tuple[GrayRaster, BinaryMask]]) -> Tuple[GrayRaster, BinaryMask]:
    if entry.chip_id not in chips:
        raise PlanSceneMismatch(f"plan references unknown chip {entry.chip_id!r}")
    chip, mask = chips[entry.chip_id]
    if chip.shape != mask.shape:
        raise ShapeMismatch(f"chip {entry.chip_id!r} {chip.shape} vs mask {mask.shape}")
    if (chip.width, chip.height) != (entry.chip_w, entry.chip_h):
        raise PlanSceneMismatch(f"chip {entry.chip_id!r} is {chip.width}x{chip.height}, plan says "
                                f"{entry.chip_w}x{entry.chip_h}")
    if entry.x + entry.chip_w > plan.width or entry.y + entry.chip_h > plan.height:
        raise PlanSceneMismatch(f"entry {entry.chip_id!r} at ({entry.x},{entry.y}) leaves the scene")
    return chip, mask


def synthesize_scene(scene: GrayRaster,
                     plan: PlacementPlan,
                     chips: Mapping[str, Tuple[GrayRaster, BinaryMask]],
                     boxes: Optional[Mapping[str, LabeledBox]] = None,
                     darken: float = 0.0,
                     label_params: AutoLabelParams = AutoLabelParams(),
                     workers: Optional[int] = None) -> Tuple[GrayRaster, List[LabeledBox]]:
    """Composite each planned chip through its object+shadow mask; return the scene and its labels.

    Ground truth per entry is the chip's auto-label box (or the one given in
    `boxes`) moved by the placement offset. Pixels outside every mask keep
    their original value.
    """
    if (scene.width, scene.height) != plan.dims:
        raise PlanSceneMismatch(f"plan is for {plan.width}x{plan.height}, scene is {scene.width}x{scene.height}")
    pairs = [_check_entry(e, plan, chips) for e in plan.entries]
    for a in range(len(plan.entries)):
        for b in range(a + 1, len(plan.entries)):
            if plan.entries[a].overlaps(plan.entries[b]):
                raise PlanSceneMismatch(f"entries {a} and {b} overlap")

    def one(k: int) -> Tuple[np.ndarray, LabeledBox]:
        entry = plan.entries[k]
        chip, mask = pairs[k]
        cut = scene.crop(entry.x, entry.y, entry.chip_w, entry.chip_h)
        patch = compose(darken_chip(chip, darken), cut, mask)
        local = (boxes or {}).get(entry.chip_id)
        if local is None:
            local = auto_label(chip, entry.class_id, label_params)
        return patch.data, local.model_copy(update={"class_id": entry.class_id}).translated(entry.x, entry.y)

    results = parallel_map(one, range(len(plan.entries)), workers)
    out = np.array(scene.data, copy=True)
    labels: List[LabeledBox] = []
    for entry, (patch, box) in zip(plan.entries, results):
        out[entry.y:entry.y + entry.chip_h, entry.x:entry.x + entry.chip_w] = patch
        labels.append(box)
    _dbg("scene", f"{plan.scene_id}: {len(labels)} targets, darken={darken}")
    return GrayRaster(out), labels


def footprint(plan: PlacementPlan, chips: Mapping[str, Tuple[GrayRaster, BinaryMask]]) -> BinaryMask:
    """Scene-sized union of every placed mask."""
    acc = np.zeros((plan.height, plan.width), dtype=bool)
    for entry in plan.entries:
        _, mask = chips[entry.chip_id]
        acc[entry.y:entry.y + entry.chip_h, entry.x:entry.x + entry.chip_w] |= mask.data
    return BinaryMask(acc)
