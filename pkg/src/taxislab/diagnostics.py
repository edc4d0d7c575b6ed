"""Monitored functionals along trajectories: masses, entropy, weighted
Dirichlet integrals, the quasi-energy/dissipation pair, and the computable
bound checks (tissue sup-norm envelope, energy-inequality constant fit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import Grid, State, integrate, laplacian_neumann

# z = u exp(-lam v) overflows double precision once lam*max(v) passes this.
EXP_GUARD = 700.0

FIT_C_MAX = 1e6


@dataclass(frozen=True)
class QuasiEnergyConfig:
    """Weights of the quasi-energy functional

        F = int u ln u + a int |grad h|^2 + (xi/2 alpha) int |grad v|^2 / v
            + b int |grad w|^2 / w + int w^2

    and of its dissipation D = int |grad u|^2 / u + int |lap h|^2.
    """

    xi: float
    alpha: float
    a: float = 1.0
    b: float = 0.01
    v_floor: float = 1e-12
    w_floor: float = 1e-12

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("quasi-energy weights a, b must be positive")


def default_b(Du: float, beta: float, xi: float, alpha: float, c_phi: float) -> float:
    """Largest w-gradient weight compatible with b(beta+1) <= Du/4 and
    b <= xi*c_phi/(4*alpha)."""
    return min(Du / (4.0 * (beta + 1.0)), xi * c_phi / (4.0 * alpha))


def entropy(grid: Grid, u: np.ndarray) -> float:
    """int u ln u with the integrand continuously extended by 0 at u = 0."""
    integrand = np.zeros_like(u)
    pos = u > 0
    integrand[pos] = u[pos] * np.log(u[pos])
    return integrate(grid, integrand)


def _face_volumes(n: int, d: float) -> np.ndarray:
    """Quadrature widths for the n-1 interior faces along an axis of n cells.

    End faces absorb the boundary half-cells so the widths tile the full axis
    length; this makes the face-based Dirichlet sum exact for linear fields.
    """
    vol = np.full(n - 1, d)
    vol[0] += 0.5 * d
    vol[-1] += 0.5 * d
    return vol


def weighted_dirichlet(grid: Grid, f: np.ndarray,
                       weight: np.ndarray | None = None,
                       floor: float = 1e-12) -> float:
    """Face-based discretization of int |grad f|^2 / g.

    ``weight`` defaults to f itself (the int |grad f|^2 / f case); pass an
    array for an external weight field, or ones for a plain Dirichlet
    integral.  Face weights are arithmetic means of the adjacent cells,
    floored to keep the quotient finite.
    """
    g = f if weight is None else weight
    total = 0.0
    if grid.nx > 1:
        grad = (f[:, 1:] - f[:, :-1]) / grid.dx
        wf = np.maximum(0.5 * (g[:, 1:] + g[:, :-1]), floor)
        total += float(np.sum(grad**2 / wf * _face_volumes(grid.nx, grid.dx)[None, :])) * grid.dy
    if grid.ny > 1:
        grad = (f[1:, :] - f[:-1, :]) / grid.dy
        wf = np.maximum(0.5 * (g[1:, :] + g[:-1, :]), floor)
        total += float(np.sum(grad**2 / wf * _face_volumes(grid.ny, grid.dy)[:, None])) * grid.dx
    return total


def dirichlet(grid: Grid, f: np.ndarray) -> float:
    """Plain face-based int |grad f|^2."""
    return weighted_dirichlet(grid, f, weight=np.ones_like(f), floor=0.5)


def quasi_energy(grid: Grid, state: State, qc: QuasiEnergyConfig) -> tuple[float, float]:
    """The pair (F, D) for one state snapshot."""
    F = (
        entropy(grid, state.u)
        + qc.a * dirichlet(grid, state.h)
        + qc.xi / (2.0 * qc.alpha) * weighted_dirichlet(grid, state.v, floor=qc.v_floor)
        + qc.b * weighted_dirichlet(grid, state.w, floor=qc.w_floor)
        + integrate(grid, state.w**2)
    )
    lap_h = laplacian_neumann(grid, state.h)
    D = weighted_dirichlet(grid, state.u, floor=qc.w_floor) + integrate(grid, lap_h**2)
    return F, D


def z_transform(state: State, lam: float) -> np.ndarray | None:
    """The field u * exp(-lam v), or None when the exponent would overflow.

    With vanishing cell diffusivity lam = xi/Du is astronomically large and
    the transform is an analysis device rather than a computable diagnostic.
    """
    if lam * float(np.max(state.v)) >= EXP_GUARD:
        return None
    return state.u * np.exp(-lam * state.v)


@dataclass(frozen=True)
class DiagnosticsRow:
    """One time sample of every monitored functional."""

    t: float
    mass_u: float
    mass_w: float
    mass_h: float
    max_u: float
    max_h: float
    max_v: float
    max_w: float
    min_v: float
    entropy_u: float
    grad_h_sq: float
    dirichlet_v: float
    dirichlet_w: float
    w_sq: float
    F: float
    D: float
    dt: float
    clipped_mass: float
    lin_iters: int


CSV_COLUMNS = tuple(DiagnosticsRow.__dataclass_fields__)


def compute_row(grid: Grid, state: State, qc: QuasiEnergyConfig, dt: float,
                clipped_mass: float, lin_iters: int) -> DiagnosticsRow:
    F, D = quasi_energy(grid, state, qc)
    return DiagnosticsRow(
        t=state.t,
        mass_u=integrate(grid, state.u),
        mass_w=integrate(grid, state.w),
        mass_h=integrate(grid, state.h),
        max_u=float(np.max(state.u)),
        max_h=float(np.max(state.h)),
        max_v=float(np.max(state.v)),
        max_w=float(np.max(state.w)),
        min_v=float(np.min(state.v)),
        entropy_u=entropy(grid, state.u),
        grad_h_sq=dirichlet(grid, state.h),
        dirichlet_v=weighted_dirichlet(grid, state.v, floor=qc.v_floor),
        dirichlet_w=weighted_dirichlet(grid, state.w, floor=qc.w_floor),
        w_sq=integrate(grid, state.w**2),
        F=F,
        D=D,
        dt=dt,
        clipped_mass=clipped_mass,
        lin_iters=lin_iters,
    )


def write_timeseries(rows: Sequence[DiagnosticsRow], path) -> None:
    """Diagnostics CSV: fixed column order, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            vals = (getattr(row, c) for c in CSV_COLUMNS)
            fh.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def _feasible(C: float, t: np.ndarray, F: np.ndarray, D: np.ndarray) -> bool:
    """Does dF/dt + D/C <= C*F + C hold at every interior sample?"""
    dFdt = (F[2:] - F[:-2]) / (t[2:] - t[:-2])
    lhs = dFdt + D[1:-1] / C
    rhs = C * F[1:-1] + C
    return bool(np.all(lhs <= rhs))


def fit_energy_constant(series: Sequence[tuple[float, float, float]]) -> float:
    """Smallest C for which the energy-dissipation inequality

        dF/dt + D/C <= C*F + C

    holds at every interior sample (centered differences on the actual
    timestamps).  Scans the decades 1e-3..1e6 and refines the feasibility
    boundary by bisection; returns ``math.inf`` when even 1e6 is infeasible.
    """
    if len(series) < 3:
        raise ValueError("need at least 3 samples to fit")
    arr = np.asarray(series, dtype=float)
    t, F, D = arr[:, 0], arr[:, 1], arr[:, 2]
    if not np.all(np.diff(t) > 0):
        raise ValueError("timestamps must be strictly increasing")

    grid_pts = [10.0**k for k in range(-3, 7)]
    first_ok = next((C for C in grid_pts if _feasible(C, t, F, D)), None)
    if first_ok is None:
        return math.inf

    lo = 0.0 if first_ok == grid_pts[0] else first_ok / 10.0
    hi = first_ok
    # bisect to well under 3 significant digits
    while hi - lo > 1e-4 * hi:
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        if _feasible(mid, t, F, D):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    first_violation_t: float | None
    worst_ratio: float  # max over samples of observed / allowed


def v_bound_check(series: Sequence[tuple[float, float]], v0_max: float,
                  C_phi: float, C_Phi: float, slack: float) -> BoundCheck:
    """Check the comparison envelope for the tissue sup-norm:

        ||v(t)||_inf <= (1 + slack) * (v0_max + C_Phi/C_phi) * exp(C_phi * t)

    ``series`` holds (t, ||v(t)||_inf) samples.
    """
    if C_phi <= 0:
        raise ValueError("C_phi must be positive")
    base = (1.0 + slack) * (v0_max + C_Phi / C_phi)
    first_violation = None
    worst = 0.0
    for t, vmax in series:
        allowed = base * math.exp(C_phi * t)
        worst = max(worst, vmax / allowed)
        if vmax > allowed and first_violation is None:
            first_violation = t
    return BoundCheck(first_violation is None, first_violation, worst)
