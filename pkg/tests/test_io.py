# tests/test_io.py
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from adaptors.annotations import (
    box_from_record, detection_record, label_record, read_detections, read_labels, read_yolo, write_detections,
    write_labels, write_yolo, yolo_lines,
)
from adaptors.features_io import read_features, sidecar, write_csv, write_raw
from adaptors.manifests import load_plan, read_chip_manifest, read_jsonl, save_plan
from adaptors.raster_io import read_mask, read_raster, write_mask, write_raster
from adaptors.run_meta import RUN_META, run_meta, write_run_meta
from models.boxes import Detection, LabeledBox, SliceRef
from models.config import CONFIG_ENV, PipelineConfig, load_config, resolve_config_path
from models.features import FeatureSet
from models.plan import PlacementEntry, PlacementPlan
from models.raster import GrayRaster
from models.slices import SliceIndex, SliceIndexEntry
from utils.errors import ConfigError, ManifestError, UnknownSlice, UnsupportedImage

ROOT = Path(__file__).resolve().parents[1]


# ——— Rasters ———
@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_raster_round_trip(tmp_path, rng, suffix):
    img = GrayRaster(rng.integers(0, 256, size=(17, 23), dtype=np.uint8))
    path = write_raster(img, tmp_path / f"chip{suffix}")
    assert read_raster(path) == img
    assert not list(tmp_path.glob("*.tmp"))


def test_mask_round_trip(tmp_path, make_random_mask, rng):
    mask = make_random_mask(rng, 30, 20, p=0.3)
    assert read_mask(write_mask(mask, tmp_path / "m.png")) == mask


def test_color_image_is_unsupported(tmp_path):
    Image.new("RGB", (4, 4)).save(tmp_path / "rgb.png")
    with pytest.raises(UnsupportedImage):
        read_raster(tmp_path / "rgb.png")
    with pytest.raises(UnsupportedImage):
        write_raster(GrayRaster.filled(4, 4, 0), tmp_path / "x.jpg")


def test_missing_image_is_a_manifest_error(tmp_path):
    with pytest.raises(ManifestError):
        read_raster(tmp_path / "nope.png")
    (tmp_path / "folder.png").mkdir()
    with pytest.raises(ManifestError):
        read_raster(tmp_path / "folder.png")


# ——— Manifests ———
def test_chip_manifest_resolves_relative_paths(tmp_path):
    folder = tmp_path / "chips"
    folder.mkdir()
    (folder / "manifest.jsonl").write_text(
        '{"image": "a.png", "class": "2S1"}\n\n{"image": "/abs/b.png", "class": "D7"}\n', encoding="utf-8")
    entries = read_chip_manifest(folder / "manifest.jsonl")
    assert [e["image"] for e in entries] == [str(folder / "a.png"), "/abs/b.png"]
    assert [e["class"] for e in entries] == ["2S1", "D7"]


def test_bad_manifest_lines(tmp_path):
    (tmp_path / "bad.jsonl").write_text('{"image": "a.png", "class": "2S1"}\n{oops\n', encoding="utf-8")
    with pytest.raises(ManifestError, match=":2:"):
        read_jsonl(tmp_path / "bad.jsonl")
    (tmp_path / "short.jsonl").write_text('{"image": "a.png"}\n', encoding="utf-8")
    with pytest.raises(ManifestError):
        read_chip_manifest(tmp_path / "short.jsonl")
    with pytest.raises(ManifestError):
        read_jsonl(tmp_path / "missing.jsonl")


def test_plan_save_and_load(tmp_path):
    plan = PlacementPlan(scene_id="s", width=400, height=300, rng_seed=7,
                         entries=[PlacementEntry(chip_id="c.png", class_id=1, x=3, y=4, chip_w=32, chip_h=16)])
    path = save_plan(plan, tmp_path / "plan.json")
    assert load_plan(path) == plan
    (tmp_path / "junk.json").write_text('{"scene_id": "s"}', encoding="utf-8")
    with pytest.raises(ManifestError):
        load_plan(tmp_path / "junk.json")


# ——— Annotations ———
def test_normalized_text_line():
    box = LabeledBox(class_id=3, x=0, y=0, w=100, h=100)
    assert yolo_lines([box], 200, 400) == ["3 0.250000 0.125000 0.500000 0.250000"]


def test_normalized_text_file_round_trip(tmp_path):
    boxes = [LabeledBox(class_id=1, x=10, y=20, w=30, h=40), LabeledBox(class_id=0, x=0, y=0, w=8, h=8)]
    path = write_yolo(boxes, 128, 96, tmp_path / "labels" / "a.txt")
    back = read_yolo(path, 128, 96)
    for a, b in zip(boxes, back):
        assert b.class_id == a.class_id
        assert (b.x, b.y, b.w, b.h) == pytest.approx((a.x, a.y, a.w, a.h), abs=1e-3)
    (tmp_path / "bad.txt").write_text("1 0.5 0.5\n", encoding="utf-8")
    with pytest.raises(ManifestError):
        read_yolo(tmp_path / "bad.txt", 10, 10)


def test_label_records_resolve_class_names(tmp_path):
    cfg = PipelineConfig()
    box = LabeledBox(class_id=2, x=5, y=6, w=7, h=8)
    write_labels([label_record("a.png", "BTR60", box)], tmp_path / "labels.jsonl")
    assert read_labels(tmp_path / "labels.jsonl", resolve=cfg.class_id) == {"a.png": [box]}
    assert box_from_record({"class": "btr-60", "x": 5, "y": 6, "w": 7, "h": 8}, cfg.class_id) == box
    with pytest.raises(ManifestError):
        box_from_record({"class": "BTR60", "x": 5, "y": 6, "w": 7})
    with pytest.raises(ManifestError):
        box_from_record({"class_id": 0, "x": 5, "y": 6, "w": 0, "h": 8})


def test_detection_records(tmp_path):
    index = SliceIndex(slices={"s_1_0": SliceIndexEntry(scene_id="s", i=1, j=0, offset=(512, 0),
                                                        size=(1024, 1024), stride=512, window=1024)})
    dets = [Detection(class_id=1, x=3, y=4, w=5, h=6, confidence=0.5,
                      source=SliceRef(scene_id="s", i=1, j=0, stride=512, name="s_1_0")),
            Detection(class_id=0, x=1.5, y=2, w=3, h=4, confidence=0.25, scene_id="s")]
    path = write_detections(dets, tmp_path / "det.jsonl")
    assert json.loads(path.read_text().splitlines()[0])["slice"] == "s_1_0"
    assert read_detections(path, index) == dets
    assert detection_record(dets[1])["scene"] == "s"

    with pytest.raises(UnknownSlice):
        read_detections(path)
    (tmp_path / "orphan.jsonl").write_text('{"class": 0, "x": 1, "y": 1, "w": 2, "h": 2, "conf": 0.5}\n')
    with pytest.raises(ManifestError):
        read_detections(tmp_path / "orphan.jsonl")


# ——— Features ———
def test_feature_files(tmp_path, rng):
    fs = FeatureSet(rng.normal(size=(200, 8)))
    assert np.array_equal(read_features(write_csv(fs, tmp_path / "f.csv")).rows, fs.rows)
    assert np.array_equal(read_features(write_raw(fs, tmp_path / "f.bin")).rows, fs.rows)

    sidecar(tmp_path / "f.bin").write_text('{"n": 5, "d": 4}', encoding="utf-8")
    with pytest.raises(ManifestError):
        read_features(tmp_path / "f.bin")
    (tmp_path / "words.csv").write_text("a,b\nc,d\n", encoding="utf-8")
    with pytest.raises(ManifestError):
        read_features(tmp_path / "words.csv")


# ——— Configuration ———
def test_shipped_config():
    cfg = load_config(ROOT / "data" / "pipeline.toml")
    assert len(cfg.class_names) == 10
    assert cfg.class_id("btr-60") == 2
    assert cfg.segmentation_for("ZSU234").percentile_fraction == 0.95
    assert cfg.autolabel_for("2S1").binarize.percentile_fraction == 0.92
    assert cfg.nms.iou_threshold == 0.7 and cfg.eval.iou_min == 0.5
    assert cfg.workers is None


def test_default_config_is_found_from_any_directory(tmp_path, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    assert resolve_config_path() == ROOT / "data" / "pipeline.toml"
    monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "other.toml"))
    assert resolve_config_path() == tmp_path / "other.toml"
    assert resolve_config_path("given.toml") == Path("given.toml")


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    (tmp_path / "broken.toml").write_text("workers = [\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "broken.toml")
    (tmp_path / "gaps.toml").write_text('[[classes]]\nid = 0\nname = "a"\n\n[[classes]]\nid = 2\nname = "b"\n',
                                        encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "gaps.toml")
    with pytest.raises(ConfigError):
        PipelineConfig().class_id("Tiger")


def test_config_hash_is_stable():
    a, b = PipelineConfig(), PipelineConfig()
    assert a.config_hash() == b.config_hash()
    changed = a.model_copy(update={"workers": 3})
    assert changed.config_hash() != a.config_hash()


def test_run_meta_is_deterministic(tmp_path):
    cfg = PipelineConfig()
    args = {"scene": tmp_path / "s.png", "size": 1024}
    first = run_meta("slice", args, cfg, "v1.0", seeds={"plan": 7})
    assert first == run_meta("slice", args, cfg, "v1.0", seeds={"plan": 7})
    assert first["args"]["scene"] == str(tmp_path / "s.png")
    assert first["config_hash"] == cfg.config_hash()
    assert "numpy" in first["libraries"]
    path = write_run_meta(tmp_path, "slice", args, cfg, "v1.0")
    assert path.name == RUN_META
    assert json.loads(path.read_text())["command"] == "slice"
