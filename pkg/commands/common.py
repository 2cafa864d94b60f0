# commands/common.py — shared runtime object and output helpers for subcommands
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import click
import pandas as pd

from adaptors.manifests import write_jsonl
from adaptors.run_meta import write_run_meta
from models.config import PipelineConfig

IMAGE_SUFFIXES = (".png", ".pgm")


@dataclass
class Runtime:
    config: PipelineConfig
    config_path: Optional[Path]
    workers: Optional[int]
    version: str

    def meta(self, out_dir: Path, command: str, args: Mapping[str, Any],
             seeds: Optional[Mapping[str, int]] = None) -> Path:
        return write_run_meta(out_dir, command, {**args, "config": self.config_path}, self.config,
                              self.version, seeds)


pass_runtime = click.make_pass_decorator(Runtime)


def emit_json(data: Any) -> None:
    click.echo(json.dumps(data, sort_keys=True))


def emit_table(df: pd.DataFrame) -> None:
    if df.empty:
        click.echo("  ".join(map(str, df.columns)))
    else:
        click.echo(df.to_string(index=False))


def write_errors(errors: List[Dict[str, str]], out_dir: Path) -> Optional[Path]:
    """Per-item failures of a batch; nothing is written when the batch was clean."""
    if not errors:
        return None
    return write_jsonl(sorted(errors, key=lambda e: e.get("image", "")), out_dir / "errors.jsonl")


def list_images(folder: Path) -> List[Path]:
    return sorted(p for p in folder.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
