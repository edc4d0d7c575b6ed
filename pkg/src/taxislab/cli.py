"""Command-line entry point: run / check / compare / sweep."""

from __future__ import annotations

import argparse
import sys

from .experiments import ConfigError, cmd_check, cmd_compare, cmd_run, cmd_sweep
from .solver import SolverError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxislab",
        description="Structured-grid simulator and hypothesis checker for "
                    "chemotaxis-haptotaxis systems with indirect signal production.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one scenario and write artifacts")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")

    p_check = sub.add_parser("check", help="test the structural hypotheses on a box")
    p_check.add_argument("config")

    p_cmp = sub.add_parser("compare", help="indirect vs direct signal production")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="Cartesian parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", action="append", default=[],
                         metavar="PATH=V1,V2,...",
                         help="config path and value list; repeatable")
    p_sweep.add_argument("--jobs", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out)
        if args.command == "check":
            return cmd_check(args.config)
        if args.command == "compare":
            return cmd_compare(args.config, args.out)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.axis, args.out, args.jobs)
    except (ConfigError, SolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
