"""Uniform cell-centered rectangular grid, discrete operators, initial data.

Fields are plain ``float64`` arrays of shape ``(ny, nx)``; entry ``[j, i]``
belongs to the cell centered at ``((i + 1/2) dx, (j + 1/2) dy)``, so the
flattened (C-order) layout is the row-major index ``i + j*nx``.

All differential operators assume homogeneous Neumann (no-flux) boundaries,
realized by ghost-cell reflection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on the rectangle [0, Lx] x [0, Ly]."""

    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.nx * self.ny < 16:
            raise ValueError(f"grid needs nx*ny >= 16 cells, got {self.nx}x{self.ny}")
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError("domain lengths must be positive")

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays X, Y of shape (ny, nx) holding cell-center coordinates."""
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def check_field(grid: Grid, f: np.ndarray, name: str = "field") -> np.ndarray:
    """Validate shape and finiteness of a cell field; returns it unchanged."""
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise ValueError(f"{name} has shape {f.shape}, expected {grid.shape}")
    if not np.isfinite(f).all():
        j, i = np.unravel_index(int(np.argmin(np.isfinite(f))), f.shape)
        raise ValueError(f"{name} is non-finite at cell (i={i}, j={j})")
    return f


def laplacian_neumann(grid: Grid, f: np.ndarray) -> np.ndarray:
    """5-point Laplacian with ghost-cell reflection (zero normal flux)."""
    p = np.pad(f, 1, mode="edge")
    return (p[1:-1, 2:] - 2.0 * f + p[1:-1, :-2]) / grid.dx**2 + (
        p[2:, 1:-1] - 2.0 * f + p[:-2, 1:-1]
    ) / grid.dy**2


def face_gradients(grid: Grid, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normal derivatives on cell faces; boundary faces carry 0 (no flux).

    Returns ``(gx, gy)`` with ``gx`` of shape (ny, nx+1) on vertical faces and
    ``gy`` of shape (ny+1, nx) on horizontal faces.
    """
    gx = np.zeros((grid.ny, grid.nx + 1))
    gy = np.zeros((grid.ny + 1, grid.nx))
    gx[:, 1:-1] = (f[:, 1:] - f[:, :-1]) / grid.dx
    gy[1:-1, :] = (f[1:, :] - f[:-1, :]) / grid.dy
    return gx, gy


def integrate(grid: Grid, f: np.ndarray) -> float:
    """Midpoint quadrature of a cell field over the domain."""
    return float(np.sum(f)) * grid.cell_area


@dataclass(frozen=True)
class StripeSpec:
    """Geometry of the high-density tissue bands."""

    count: int = 4
    width: float = 0.1
    orientation: str = "vertical"

    def __post_init__(self):
        if self.count < 0 or self.width <= 0:
            raise ValueError("stripe count must be >= 0 and width > 0")
        if self.orientation not in ("vertical", "horizontal"):
            raise ValueError(f"unknown stripe orientation {self.orientation!r}")


_CENTER = (0.5, 0.5)


@dataclass(frozen=True)
class InitialData:
    """Initial fields: Gaussian cell/signal bumps, producer annulus, tissue stripes."""

    eps_u: float = 0.05
    eps_h: float = 0.1
    eps_w: float = 0.01
    r0: float = 0.5
    v_max: float = 1.0
    v_min: float = 0.2
    center_u: tuple[float, float] = _CENTER
    center_h: tuple[float, float] = _CENTER
    center_w: tuple[float, float] = _CENTER
    stripes: StripeSpec = field(default_factory=StripeSpec)

    def __post_init__(self):
        if min(self.eps_u, self.eps_h, self.eps_w) <= 0:
            raise ValueError("Gaussian widths must be positive")
        if not (self.v_max >= self.v_min > 0):
            raise ValueError("tissue levels must satisfy v_max >= v_min > 0")
        if self.r0 < 0:
            raise ValueError("annulus radius must be nonnegative")


@dataclass
class State:
    """The four cell fields plus simulation time."""

    u: np.ndarray
    h: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.u.copy(), self.h.copy(), self.v.copy(), self.w.copy(), self.t)

    def validate(self, grid: Grid, v_floor: float = 0.0) -> None:
        for name in ("u", "h", "v", "w"):
            check_field(grid, getattr(self, name), name)
        if self.u.min() < 0 or self.h.min() < 0 or self.w.min() < 0:
            raise ValueError("u, h, w must be nonnegative")
        if self.v.min() < v_floor:
            raise ValueError(f"v dropped below its floor {v_floor}")


def _stripe_intervals(spec: StripeSpec, length: float) -> list[tuple[float, float]]:
    gap = (length - spec.count * spec.width) / (spec.count + 1)
    return [
        (gap + k * (gap + spec.width), gap + k * (gap + spec.width) + spec.width)
        for k in range(spec.count)
    ]


def stripe_mask(grid: Grid, spec: StripeSpec) -> np.ndarray:
    """Boolean mask of cells whose center lies inside a stripe."""
    X, Y = grid.cell_centers()
    coord, length = (X, grid.Lx) if spec.orientation == "vertical" else (Y, grid.Ly)
    mask = np.zeros(grid.shape, dtype=bool)
    for lo, hi in _stripe_intervals(spec, length):
        mask |= (coord >= lo) & (coord < hi)
    return mask


def init_scenario(init: InitialData, grid: Grid, with_producer: bool = True) -> State:
    """Build the t = 0 state: Gaussians for u and h, an annulus for w (zeroed
    when the model has no producer field), and striped tissue for v."""
    X, Y = grid.cell_centers()

    def gaussian(center, eps):
        r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
        return np.exp(-r2 / (2.0 * eps))

    u = gaussian(init.center_u, init.eps_u)
    h = gaussian(init.center_h, init.eps_h)
    if with_producer:
        r = np.sqrt((X - init.center_w[0]) ** 2 + (Y - init.center_w[1]) ** 2)
        w = np.exp(-((r - init.r0) ** 2) / (2.0 * init.eps_w))
    else:
        w = grid.zeros()

    mask = stripe_mask(grid, init.stripes)
    if not mask.any() or mask.all():
        warnings.warn("tissue stripe set is empty or covers the whole domain")
    v = np.where(mask, init.v_max, init.v_min)

    return State(u=u, h=h, v=v, w=w, t=0.0)


def write_snapshot(grid: Grid, f: np.ndarray, path) -> None:
    """Write one field as CSV: header ``x,y,value``, row-major cell order,
    17 significant digits."""
    X, Y = grid.cell_centers()
    with open(path, "w", newline="") as fh:
        fh.write("x,y,value\n")
        for xj, yj, vj in zip(X.ravel(), Y.ravel(), np.asarray(f, dtype=float).ravel()):
            fh.write(f"{xj:.17g},{yj:.17g},{vj:.17g}\n")
