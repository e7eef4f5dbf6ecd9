"""Command-line entry point: run and validate experiment configurations."""

from __future__ import annotations

import argparse
import sys

from .config import format_flat, load_config, preset_names, validate_config
from .errors import ConfigError
from .runner import run_experiment

CONFIG_ERROR = 2
RUNTIME_ERROR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttflow",
        description="Explicit PDE time stepping on tensor-train compressed grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a configuration and write artifacts")
    run.add_argument("config", help="config file path or preset name")
    run.add_argument("--out", default=None, help="output directory (default: run.out_dir)")
    run.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="replace one config value; repeatable",
    )

    val = sub.add_parser("validate", help="resolve a configuration and echo it")
    val.add_argument("config", help="config file path or preset name")
    val.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    presets = sub.add_parser("presets", help="preset utilities")
    presets.add_argument("action", choices=["list"], help="list available presets")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "presets":
        for name in preset_names():
            print(name)
        return 0
    if args.command == "validate":
        config, problems = validate_config(args.config, args.override)
        if config is None:
            for p in problems:
                print(f"error: {p}", file=sys.stderr)
            return CONFIG_ERROR
        sys.stdout.write(format_flat(config.resolved))
        return 0
    try:
        config = load_config(args.config, args.override)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return CONFIG_ERROR
    try:
        run_experiment(config, out_dir=args.out, log=print)
    except Exception as exc:  # surface runtime failures with a distinct code
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
