"""Command-line entry point.

    smallgrad run --config cfg.yaml --out results/
    smallgrad validate --config cfg.yaml
    smallgrad list-methods

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (ConfigError, list_methods, load_config, run_experiment,
                      validate_config, write_report)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smallgrad",
        description="Benchmark harness for gradient-norm minimization of "
                    "smooth convex finite-sums.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None,
                       help="output directory (overrides config out_dir)")
    p_run.add_argument("--no-figures", action="store_true",
                       help="emit CSVs only")

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("--config", required=True)

    sub.add_parser("list-methods", help="show available methods")
    return parser


def _load(path):
    try:
        cfg = load_config(path)
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    problems = validate_config(cfg)
    if problems:
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        raise SystemExit(2)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-methods":
        for info in list_methods():
            params = f" (params: {', '.join(info.allowed_params)})" \
                if info.allowed_params else ""
            print(f"{info.name:18s} [{info.kind}] {info.description}{params}")
        return 0

    if args.command == "validate":
        _load(args.config)
        print("config OK")
        return 0

    # run
    cfg = _load(args.config)
    out_dir = args.out or cfg.out_dir
    if not out_dir:
        print("config error: no output directory (set out_dir or --out)",
              file=sys.stderr)
        return 2
    try:
        result = run_experiment(cfg)
        paths = write_report(result, out_dir, figures=not args.no_figures)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    for key in sorted(paths):
        print(f"{key}: {paths[key]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
