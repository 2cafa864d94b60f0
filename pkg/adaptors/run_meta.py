# adaptors/run_meta.py — run_meta.json written next to every command's artifacts
from __future__ import annotations

from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from adaptors.manifests import save_json
from models.config import PipelineConfig

RUN_META = "run_meta.json"
TRACKED_LIBS = ("numpy", "scipy", "pillow", "pydantic", "pandas", "click", "rich", "toml")


def library_versions() -> Dict[str, str]:
    out = {}
    for name in TRACKED_LIBS:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = "missing"
    return out


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def run_meta(command: str, args: Mapping[str, Any], config: PipelineConfig, tool_version: str,
             seeds: Optional[Mapping[str, int]] = None) -> Dict[str, Any]:
    """No timestamps: identical runs produce identical metadata."""
    return {
        "command": command,
        "args": {k: _plain(v) for k, v in sorted(args.items())},
        "config_hash": config.config_hash(),
        "seeds": dict(seeds or {}),
        "version": tool_version,
        "libraries": library_versions(),
    }


def write_run_meta(out_dir: Union[str, Path], command: str, args: Mapping[str, Any],
                   config: PipelineConfig, tool_version: str,
                   seeds: Optional[Mapping[str, int]] = None) -> Path:
    return save_json(run_meta(command, args, config, tool_version, seeds), Path(out_dir) / RUN_META)
