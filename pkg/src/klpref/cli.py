"""Command-line entry point.

Subcommands: run-online, run-offline, sweep-eta, validate. Exit status 0
on success, 1 on configuration errors, 2 on runtime errors. The output
directory can be overridden with --output-dir or the KLPREF_OUT_DIR
environment variable.
"""

import argparse
import sys

from klpref.backend import ACTIVE_BACKEND
from klpref.config import (
    load_config,
    require_offline,
    require_online,
    require_sweep,
)
from klpref.errors import ConfigError
from klpref.harness import run_eta_sweep, run_offline_experiment, run_online_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klpref",
        description="KL-regularized preference-bandit simulation lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run-online", "run online learners and write regret CSVs"),
        ("run-offline", "run the offline sample-complexity sweep"),
        ("sweep-eta", "repeat the online run per regularization strength"),
        ("validate", "parse a config and print its canonical form"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("config", help="path to the experiment config")
        if name != "validate":
            cmd.add_argument(
                "--output-dir",
                default=None,
                help="override the configured output directory",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "validate":
            sys.stdout.write(config.canonical_text())
            return 0
        if args.command == "run-online":
            require_online(config)
        elif args.command == "run-offline":
            require_offline(config)
        else:
            require_sweep(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    print(f"backend: {ACTIVE_BACKEND}", file=sys.stderr)
    try:
        if args.command == "run-online":
            out = run_online_experiment(config, args.output_dir)
        elif args.command == "run-offline":
            out = run_offline_experiment(config, args.output_dir)
        else:
            out = run_eta_sweep(config, args.output_dir)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out['raw']}", file=sys.stderr)
    print(f"wrote {out['summary']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
