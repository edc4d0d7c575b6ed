"""taxisplot: figure rendering for taxislab CSV artifacts."""

from .io import ArtifactError, discover_snapshots, read_snapshot, read_timeseries
from .panels import FigureSpec, render_panels
from .series import SERIES_PIXEL_SIZE, render_timeseries

__all__ = [
    "ArtifactError", "discover_snapshots", "read_snapshot", "read_timeseries",
    "FigureSpec", "render_panels", "SERIES_PIXEL_SIZE", "render_timeseries",
]

__version__ = "0.1.0"
