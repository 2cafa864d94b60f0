# utils/log.py — debug / warning lines on stderr
"""Tiny output layer behind the per-module `_dbg` helpers.

Modules keep the habit of a private `_dbg(tag, value)` that prints
`[SCOPE DEBUG] tag: value`; this module owns the console so stdout stays
clean for command results. Debug lines only show in verbose mode
(`--verbose` or SARSCENE_DEBUG=1); warnings always show.
"""
from __future__ import annotations

import os

from rich.console import Console

_console = Console(stderr=True, highlight=False, soft_wrap=True)
_verbose = os.getenv("SARSCENE_DEBUG", "0").lower() in ("1", "true", "yes")


def set_verbose(flag: bool) -> None:
    global _verbose
    _verbose = bool(flag)


def dbg(scope: str, tag: str, value: object) -> None:
    if not _verbose:
        return
    _console.print(f"[{scope.upper()} DEBUG] {tag}: {value}", markup=False)


def warn(scope: str, tag: str, value: object) -> None:
    _console.print(f"[{scope.upper()} WARN] {tag}: {value}", style="yellow", markup=False)
