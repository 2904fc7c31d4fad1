"""Batch command line: run experiment configs, validate them, list builtins.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numeric or domain error.  KERFLOW_SEED overrides the config seed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .algebra import ALGEBRA_CATALOG
from .config import KINDS, parse_config
from .errors import ConfigError, KerflowError
from .flows import FIELD_CATALOG
from .kernels import KERNEL_CATALOG
from .operators import ACTION_CATALOG
from .runner import run_experiment

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    stem = os.path.splitext(os.path.basename(args.config))[0]
    try:
        report = run_experiment(cfg, csv_dir=args.csv_dir, csv_stem=stem)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except KerflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR
    print(report.to_json(stable_output=args.stable_output))
    return EXIT_PASS if report.passed else EXIT_CHECK_FAILURE


def _cmd_validate(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    print(f"ok: {cfg.kind} experiment, seed {cfg.seed}")
    return EXIT_PASS


def _cmd_list_builtins(args) -> int:
    print("experiment kinds:")
    for kind in KINDS:
        print(f"  {kind}")
    print("\nkernels:")
    for name, desc in KERNEL_CATALOG.items():
        print(f"  {name:18s} {desc}")
    print("\nalgebras:")
    for name, desc in ALGEBRA_CATALOG.items():
        print(f"  {name:18s} {desc}")
    print("\nactions:")
    for name, desc in ACTION_CATALOG.items():
        print(f"  {name:18s} {desc}")
    print("\nvector fields:")
    for name, desc in FIELD_CATALOG.items():
        print(f"  {name:18s} {desc}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerflow",
        description="finite-rank verification lab for kernel spaces and "
                    "reflection-positive quotients")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config", help="path to a JSON experiment config")
    run_p.add_argument("--stable-output", action="store_true",
                       help="drop timings so repeated runs are byte-identical")
    run_p.add_argument("--csv-dir", default=None,
                       help="directory for CSV curve exports")
    run_p.set_defaults(func=_cmd_run)

    val_p = sub.add_parser("validate", help="validate a config without running")
    val_p.add_argument("config")
    val_p.set_defaults(func=_cmd_validate)

    list_p = sub.add_parser("list-builtins", help="print the builtin catalog")
    list_p.set_defaults(func=_cmd_list_builtins)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
