"""Heatmap panel grids: rows are snapshot times (initial state on top),
columns are fields, with one color scale per column so growth stays visible
down the column."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import FIELD_ORDER, ArtifactError, discover_snapshots, read_snapshot

PANEL_INCHES = 2.5  # 2.5 in * 100 dpi = exactly 250 px per panel
DPI = 100

FIELD_TITLES = {"u": "cells u", "v": "tissue v", "h": "signal h",
                "w": "producers w"}


@dataclass
class FigureSpec:
    """What to render from one run directory."""

    run_dir: Path
    fields: tuple[str, ...]
    snapshots: tuple[int, ...]
    out_path: Path

    @classmethod
    def from_run(cls, run_dir, fields=None, snapshots=None,
                 out_path=None) -> "FigureSpec":
        """Defaults: every field present on disk (paper column order) and all
        snapshot indices common to them."""
        run_dir = Path(run_dir)
        found = discover_snapshots(run_dir)
        if not found:
            raise ArtifactError(f"{run_dir}: no snapshot CSVs found")
        if fields is None:
            fields = tuple(f for f in FIELD_ORDER if f in found)
        else:
            fields = tuple(fields)
            missing = [f for f in fields if f not in found]
            if missing:
                raise ArtifactError(
                    f"{run_dir}: no snapshots for field(s) {', '.join(missing)}")
        common = set(found[fields[0]])
        for f in fields[1:]:
            common &= set(found[f])
        if snapshots is None:
            snapshots = tuple(sorted(common))
        else:
            snapshots = tuple(snapshots)
            absent = [i for i in snapshots if i not in common]
            if absent:
                raise ArtifactError(
                    f"{run_dir}: snapshot index(es) {absent} not on disk for "
                    f"fields {fields}")
        if out_path is None:
            out_path = run_dir / "panels.png"
        return cls(run_dir, fields, snapshots, Path(out_path))

    @property
    def pixel_size(self) -> tuple[int, int]:
        """(width, height) of the rendered image in pixels."""
        return (int(PANEL_INCHES * DPI) * len(self.fields),
                int(PANEL_INCHES * DPI) * len(self.snapshots))


def render_panels(spec: FigureSpec) -> Path:
    """Render the panel grid; returns the written image path."""
    nrows, ncols = len(spec.snapshots), len(spec.fields)
    data = {
        (i, f): read_snapshot(spec.run_dir / f"{f}_{i:04d}.csv")
        for i in spec.snapshots for f in spec.fields
    }
    shapes = {arr.shape for arr in data.values()}
    if len(shapes) != 1:
        raise ArtifactError(f"{spec.run_dir}: inconsistent snapshot grids {shapes}")

    # per-column scale over the plotted snapshots
    limits = {}
    for f in spec.fields:
        stack = [data[(i, f)] for i in spec.snapshots]
        limits[f] = (min(a.min() for a in stack), max(a.max() for a in stack))

    fig, axes = plt.subplots(
        nrows, ncols,
        figsize=(PANEL_INCHES * ncols, PANEL_INCHES * nrows),
        dpi=DPI, squeeze=False)
    for r, idx in enumerate(spec.snapshots):
        for c, f in enumerate(spec.fields):
            ax = axes[r][c]
            vmin, vmax = limits[f]
            if vmin == vmax:
                vmax = vmin + 1.0
            ax.imshow(data[(idx, f)], origin="lower", cmap="viridis",
                      vmin=vmin, vmax=vmax, extent=(0, 1, 0, 1))
            ax.set_xticks([])
            ax.set_yticks([])
            if r == 0:
                ax.set_title(FIELD_TITLES.get(f, f), fontsize=9)
            if c == 0:
                ax.set_ylabel(f"snapshot {idx}", fontsize=8)
    fig.subplots_adjust(left=0.08, right=0.99, top=0.94, bottom=0.01,
                        wspace=0.04, hspace=0.04)
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    # no tight bounding box: the pixel size must stay exactly figsize * dpi
    fig.savefig(spec.out_path, dpi=DPI)
    plt.close(fig)
    return spec.out_path
