"""Command-line entry point: panels / series."""

from __future__ import annotations

import argparse
import sys

from .io import ArtifactError
from .panels import FigureSpec, render_panels
from .series import render_timeseries


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxisplot",
        description="Render figures from taxislab run artifacts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_panels = sub.add_parser("panels", help="field heatmaps, times down, "
                                             "fields across")
    p_panels.add_argument("run_dir")
    p_panels.add_argument("--snapshots", default=None,
                          help="comma-separated snapshot indices (default: all)")
    p_panels.add_argument("--fields", default=None,
                          help="comma-separated field subset (default: all present)")
    p_panels.add_argument("--out", default=None)

    p_series = sub.add_parser("series", help="diagnostics time series")
    p_series.add_argument("run_dir")
    p_series.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "panels":
            snapshots = None
            if args.snapshots:
                snapshots = tuple(int(s) for s in args.snapshots.split(","))
            fields = tuple(args.fields.split(",")) if args.fields else None
            spec = FigureSpec.from_run(args.run_dir, fields=fields,
                                       snapshots=snapshots, out_path=args.out)
            path = render_panels(spec)
            w, h = spec.pixel_size
            print(f"wrote {path} ({w}x{h} px, {len(spec.snapshots)} rows x "
                  f"{len(spec.fields)} columns)")
            return 0
        if args.command == "series":
            path = render_timeseries(args.run_dir, args.out)
            print(f"wrote {path}")
            return 0
    except (ArtifactError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
