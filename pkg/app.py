# app.py — sarscene launcher (v1.0): dataset building and scoring subcommands
from __future__ import annotations

import json
import sys
from importlib import import_module
from typing import Dict, List, Optional

import click

from commands.common import Runtime
from models.config import load_config, resolve_config_path
from utils.errors import SarSceneError
from utils.log import dbg, set_verbose

# ——— Global config ————————————————————————————————————
APP_VERSION = "v1.0"

# ——— Commands ————————————————————————————————————————
COMMANDS: Dict[str, str] = {
    "segment": "commands.segment",
    "autolabel": "commands.autolabel",
    "plan": "commands.plan",
    "synth": "commands.synth",
    "slice": "commands.slice",
    "noise": "commands.noise",
    "nms": "commands.nms",
    "eval": "commands.evaluate",
    "fid": "commands.fid",
}


def _emit_error(name: str, message: str) -> None:
    click.echo(json.dumps({"error": name, "message": message}), err=True)


class LazyGroup(click.Group):
    """Subcommands imported on first use; errors become one JSON line on stderr plus an exit code."""

    def list_commands(self, ctx: click.Context) -> List[str]:
        return list(COMMANDS)

    def get_command(self, ctx: click.Context, name: str) -> Optional[click.Command]:
        path = COMMANDS.get(name)
        if path is None:
            return None
        return import_module(path).command

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
        except SarSceneError as exc:
            click.echo(json.dumps(exc.to_dict()), err=True)
            sys.exit(exc.exit_code)
        except click.UsageError as exc:
            _emit_error("UsageError", exc.format_message())
            sys.exit(1)
        except click.ClickException as exc:
            _emit_error(type(exc).__name__, exc.format_message())
            sys.exit(1)
        except click.Abort:
            _emit_error("Aborted", "aborted")
            sys.exit(1)
        except OSError as exc:
            _emit_error(type(exc).__name__, str(exc))
            sys.exit(2)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=LazyGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="pipeline TOML (default: $SARSCENE_CONFIG, then data/pipeline.toml)")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="parallel workers (default: all cores)")
@click.option("--verbose", is_flag=True, help="debug lines on stderr")
@click.version_option(APP_VERSION, prog_name="sarscene")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], workers: Optional[int], verbose: bool) -> None:
    if verbose:
        set_verbose(True)
    path = resolve_config_path(config_path)
    config = load_config(path)
    ctx.obj = Runtime(config=config, config_path=path, workers=workers or config.workers,
                      version=APP_VERSION)
    dbg("app", "config", f"{path or 'built-in defaults'} ({config.config_hash()[:12]})")


if __name__ == "__main__":
    cli()
