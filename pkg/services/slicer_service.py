# services/slicer_service.py — fast sliding: tile a labeled scene, keep windows holding whole targets
from __future__ import annotations

from typing import Iterator, List, Optional, Sequence, Tuple

from models.boxes import LabeledBox
from models.raster import GrayRaster
from models.slices import SliceIndex, SliceRecord, slice_name
from utils.errors import InvalidStride
from utils.log import dbg

SLICE_SIZES = (128, 256, 512, 1024)


def _dbg(tag: str, val: object) -> None:
    dbg("slicer", tag, val)


def slice_sizes_default() -> List[int]:
    return list(SLICE_SIZES)


def default_stride(size: int) -> int:
    return max(1, size // 2)


def contains(box: LabeledBox, offset: Tuple[int, int], size: Tuple[int, int]) -> bool:
    """Strict containment: x_min > ox, x_max < ox + w, y_min > oy, y_max < oy + h."""
    ox, oy = offset
    sw, sh = size
    return box.x > ox and box.x + box.w < ox + sw and box.y > oy and box.y + box.h < oy + sh


def axis_windows(length: int, size: int, stride: int) -> List[Tuple[int, int]]:
    """(start, extent) along one axis: full windows at k*stride, then one trailing remainder if needed."""
    if size <= 0 or stride <= 0 or stride > size:
        raise InvalidStride(f"need 0 < stride <= size, got stride={stride}, size={size}")
    out: List[Tuple[int, int]] = []
    k = 0
    while k * stride + size <= length:
        out.append((k * stride, size))
        k += 1
    covered = (k - 1) * stride + size if k else 0
    if covered < length:
        start = k * stride
        out.append((start, length - start))
    return out


def window_grid(width: int, height: int, size: int, stride: int) -> Iterator[Tuple[int, int, int, int, int, int]]:
    """Yields (i, j, x, y, w, h) row-major: j outer, i inner."""
    xs = axis_windows(width, size, stride)
    ys = axis_windows(height, size, stride)
    for j, (y, h) in enumerate(ys):
        for i, (x, w) in enumerate(xs):
            yield i, j, x, y, w, h


def remap(box: LabeledBox, offset: Tuple[int, int]) -> LabeledBox:
    return box.translated(-offset[0], -offset[1])


def slide(scene: GrayRaster, labels: Sequence[LabeledBox], size: int, stride: Optional[int] = None,
          scene_id: str = "scene") -> List[SliceRecord]:
    """Windows with at least one fully contained target, labels remapped into the window frame."""
    stride = default_stride(size) if stride is None else stride
    records: List[SliceRecord] = []
    for i, j, x, y, w, h in window_grid(scene.width, scene.height, size, stride):
        inside = [remap(b, (x, y)) for b in labels if contains(b, (x, y), (w, h))]
        if not inside:
            continue
        records.append(SliceRecord(scene_id=scene_id, i=i, j=j, offset=(x, y), size=(w, h),
                                   stride=stride, window=size, labels=inside))
    _dbg("slices", f"{scene_id}: {len(records)} kept at size {size}/stride {stride}")
    return records


def slide_multi(scene: GrayRaster, labels: Sequence[LabeledBox], sizes: Sequence[int] = SLICE_SIZES,
                scene_id: str = "scene", stride_ratio: float = 0.5) -> List[SliceRecord]:
    """Training-set expansion: tile at every size with stride size*stride_ratio.

    Sizes larger than both scene sides are skipped.
    """
    if not 0 < stride_ratio <= 1:
        raise InvalidStride(f"stride_ratio must be in (0, 1], got {stride_ratio}")
    out: List[SliceRecord] = []
    for size in sizes:
        if size > max(scene.width, scene.height):
            _dbg("skip size", size)
            continue
        out.extend(slide(scene, labels, size, max(1, int(size * stride_ratio)), scene_id))
    return out


def background_windows(width: int, height: int, labels: Sequence[LabeledBox], size: int,
                       stride: Optional[int] = None) -> int:
    """Grid windows that no ground-truth box touches; the TN pool for FPR."""
    stride = default_stride(size) if stride is None else stride
    count = 0
    for _, _, x, y, w, h in window_grid(width, height, size, stride):
        touched = any(b.x < x + w and b.x + b.w > x and b.y < y + h and b.y + b.h > y for b in labels)
        if not touched:
            count += 1
    return count


def crop_slice(scene: GrayRaster, rec: SliceRecord) -> GrayRaster:
    return scene.crop(rec.offset[0], rec.offset[1], rec.size[0], rec.size[1])


def build_index(records: Sequence[SliceRecord], multi_size: bool = False,
                index: Optional[SliceIndex] = None) -> SliceIndex:
    index = index or SliceIndex()
    for rec in records:
        name = slice_name(rec.scene_id, rec.i, rec.j, rec.window if multi_size else None)
        index.add(name, rec)
    return index
