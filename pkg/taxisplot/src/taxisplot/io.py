"""Readers for the simulator's CSV artifacts.

Snapshot files are ``<field>_<index>.csv`` with header ``x,y,value`` in
row-major cell order; the diagnostics series is ``timeseries.csv`` with one
named column per monitored functional.  Reading is strictly read-only.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

SNAPSHOT_PATTERN = re.compile(r"^([a-zA-Z]+)_(\d+)\.csv$")

# paper-style column order: cells, tissue, signal, producer
FIELD_ORDER = ("u", "v", "h", "w")


class ArtifactError(ValueError):
    """Missing, malformed, or inconsistent run artifacts."""


def read_snapshot(path: Path) -> np.ndarray:
    """One field CSV as a (ny, nx) array; raises naming the file on damage."""
    lines = path.read_text().strip().split("\n")
    if not lines or lines[0] != "x,y,value":
        raise ArtifactError(f"{path}: expected header 'x,y,value'")
    xs, ys, vals = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ArtifactError(f"{path}: line {lineno}: expected 3 columns")
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError as exc:
            raise ArtifactError(f"{path}: line {lineno}: {exc}") from exc
        xs.append(x)
        ys.append(y)
        vals.append(v)
    nx = len(np.unique(xs))
    ny = len(np.unique(ys))
    if nx * ny != len(vals):
        raise ArtifactError(
            f"{path}: {len(vals)} cells do not fill a {nx}x{ny} grid")
    return np.asarray(vals).reshape(ny, nx)


def discover_snapshots(run_dir: Path) -> dict[str, list[int]]:
    """Map field name -> sorted snapshot indices present in a run directory."""
    found: dict[str, list[int]] = {}
    for path in Path(run_dir).iterdir():
        m = SNAPSHOT_PATTERN.match(path.name)
        if m:
            found.setdefault(m.group(1), []).append(int(m.group(2)))
    for indices in found.values():
        indices.sort()
    return found


def read_timeseries(path: Path) -> dict[str, np.ndarray]:
    """timeseries.csv as column name -> array; malformed rows name their line."""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"{path}: timeseries not found")
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    columns: list[list[float]] = [[] for _ in header]
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ArtifactError(
                f"{path}: line {lineno}: {len(parts)} fields, expected {len(header)}")
        for col, part in zip(columns, parts):
            try:
                col.append(float(part))
            except ValueError as exc:
                raise ArtifactError(f"{path}: line {lineno}: {exc}") from exc
    return {name: np.asarray(col) for name, col in zip(header, columns)}


def require_columns(series: dict[str, np.ndarray], names) -> None:
    missing = [n for n in names if n not in series]
    if missing:
        raise ArtifactError("missing column" + ("s" if len(missing) > 1 else "")
                            + ": " + ", ".join(missing))
