"""Time-series figures from the diagnostics CSV: masses, the cell sup-norm on
a log scale, and the energy/dissipation pair.  A comparison directory (one
holding compare.json plus per-variant run subdirectories) gets overlaid
sup-norm curves."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import read_timeseries, require_columns

FIG_INCHES = (9.6, 6.0)
DPI = 100

SERIES_PIXEL_SIZE = (int(FIG_INCHES[0] * DPI), int(FIG_INCHES[1] * DPI))

PANELS = (
    ("mass_u", "cell mass", "linear"),
    ("mass_w", "producer mass", "linear"),
    ("mass_h", "signal mass", "linear"),
    ("max_u", "sup norm of u", "log"),
    ("F", "quasi-energy F", "linear"),
    ("D", "dissipation D", "linear"),
)


def _compare_subruns(run_dir: Path) -> list[Path] | None:
    if not (run_dir / "compare.json").exists():
        return None
    return sorted(p.parent for p in run_dir.glob("*/timeseries.csv"))


def render_timeseries(run_dir, out_path=None) -> Path:
    """Render the diagnostics series of one run, or overlay a compare pair."""
    run_dir = Path(run_dir)
    subruns = _compare_subruns(run_dir)
    if subruns is not None:
        series = {p.name: read_timeseries(p / "timeseries.csv") for p in subruns}
    else:
        series = {run_dir.name: read_timeseries(run_dir / "timeseries.csv")}
    for s in series.values():
        require_columns(s, ["t"] + [name for name, _, _ in PANELS])

    if out_path is None:
        out_path = run_dir / "series.png"
    out_path = Path(out_path)

    fig, axes = plt.subplots(2, 3, figsize=FIG_INCHES, dpi=DPI)
    for ax, (column, label, scale) in zip(axes.ravel(), PANELS):
        for name, s in series.items():
            marker = "o" if len(s["t"]) < 30 else None
            ax.plot(s["t"], s[column], label=name, marker=marker, markersize=3)
        if scale == "log":
            ax.set_yscale("log")
        ax.set_xlabel("t", fontsize=8)
        ax.set_title(label, fontsize=9)
        ax.tick_params(labelsize=7)
        if len(series) > 1:
            ax.legend(fontsize=7)
    fig.tight_layout()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return out_path
