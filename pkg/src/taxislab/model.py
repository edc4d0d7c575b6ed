"""Kinetics of the four-field taxis system and the structural-hypothesis checker.

The solver integrates

    u_t = Du lap(u) - chi div(u grad h) - xi div(u grad v) + f(u,v,w,h)
    h_t = Dh lap(h) + g(u,v,w,h)
    v_t = -alpha u v + v phi(u,v,w,h) + Phi(w)
    w_t = beta u + w psi(u,v,w,h)

and a :class:`Kinetics` bundles the reaction terms f, g, phi, Phi, psi of one
concrete model together with their first partials.  Three built-ins are
provided: the cancer-invasion model with producer-mediated (indirect) signal
production, its direct-production control variant, and the go-or-grow
two-phenotype model.

:func:`check_hypotheses` numerically falsifies, on a sampled box, the
structural growth/decay conditions (Hf), (Hg), (Hphi), (HPhi), (Hpsi) under
which solutions of the system stay globally bounded.  A pass certifies the
inequalities at the sampled points only; a failure comes with a re-checkable
witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# An inequality "lhs <= rhs" only counts as violated beyond this relative slack.
CHECK_RTOL = 1e-12


class ConfigurationError(ValueError):
    """Inconsistent model parameters or scenario configuration."""


def _positive(**kwargs) -> None:
    for name, val in kwargs.items():
        if not val > 0:
            raise ConfigurationError(f"{name} must be strictly positive, got {val}")


def _nonnegative(**kwargs) -> None:
    for name, val in kwargs.items():
        if not val >= 0:
            raise ConfigurationError(f"{name} must be nonnegative, got {val}")


@dataclass(frozen=True)
class ModelParams:
    """Transport and frame coefficients of the four-field system."""

    chi: float
    xi: float
    alpha: float
    beta: float
    Du: float
    Dh: float

    def __post_init__(self):
        _positive(chi=self.chi, xi=self.xi, alpha=self.alpha, beta=self.beta,
                  Du=self.Du, Dh=self.Dh)

    @property
    def lam(self) -> float:
        """Exponent xi/Du of the substitution z = u exp(-lam v)."""
        return self.xi / self.Du


@dataclass(frozen=True)
class CafParams:
    """Rates of the cancer-invasion model (producer-mediated signal)."""

    mu: float = 0.0
    eta: float = 0.0
    alpha_h: float = 0.0
    beta_v: float = 0.0
    gamma_w: float = 0.0
    variant: str = "indirect"

    def __post_init__(self):
        _nonnegative(mu=self.mu, eta=self.eta, alpha_h=self.alpha_h,
                     beta_v=self.beta_v, gamma_w=self.gamma_w)
        if self.variant not in ("indirect", "direct"):
            raise ConfigurationError(f"unknown caf variant {self.variant!r}")


@dataclass(frozen=True)
class GoGrowParams:
    """Rate constants k1..k9 of the go-or-grow model."""

    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 1.0
    k5: float = 0.0
    k6: float = 1.0
    k7: float = 0.0
    k8: float = 0.0
    k9: float = 0.0

    def __post_init__(self):
        _positive(k4=self.k4, k6=self.k6)
        _nonnegative(k1=self.k1, k2=self.k2, k3=self.k3, k5=self.k5,
                     k7=self.k7, k8=self.k8, k9=self.k9)


Evaluator = Callable[..., np.ndarray]


@dataclass(frozen=True)
class Kinetics:
    """Reaction terms of one model plus analytic first partials.

    Evaluators take (u, v, w, h) except ``Phi``/``Phi_prime`` which take w
    alone; all accept scalars or broadcastable arrays and must stay finite on
    every bounded box of the nonnegative orthant.  ``producer_active`` tells
    the solver whether the w-equation carries the ``beta*u`` activation source
    (False for models without a producer field, where w stays identically 0).
    """

    name: str
    f: Evaluator
    g: Evaluator
    phi: Evaluator
    Phi: Evaluator
    psi: Evaluator
    phi_u: Evaluator
    phi_v: Evaluator
    phi_w: Evaluator
    phi_h: Evaluator
    psi_u: Evaluator
    psi_v: Evaluator
    psi_w: Evaluator
    psi_h: Evaluator
    Phi_prime: Evaluator
    producer_active: bool = True


def _zero4(u, v, w, h):
    return 0.0


def _zero1(w):
    return 0.0


def make_caf(params: ModelParams, caf: CafParams) -> Kinetics:
    """Kinetics of the cancer-invasion model in four-field form.

    Indirect variant: the signal h is produced by the w field (rate alpha_h),
    tissue is rebuilt at rate beta_v via the saturating source w/(1+w), and w
    is activated by u at rate gamma_w.  Direct variant: h is produced by u
    itself and the w field is absent (kept identically zero).
    The tissue frame uses alpha := eta, phi = eta(1-v) - h.
    """
    mu, eta, ah, bv = caf.mu, caf.eta, caf.alpha_h, caf.beta_v
    indirect = caf.variant == "indirect"
    if not indirect and (bv != 0.0 or caf.gamma_w != 0.0):
        raise ConfigurationError(
            "direct variant has no producer field: beta_v and gamma_w must be 0")

    def f(u, v, w, h):
        return mu * u * (1.0 - u - v - w)

    if indirect:
        def g(u, v, w, h):
            return -h + ah * w
    else:
        def g(u, v, w, h):
            return -h + ah * u

    def phi(u, v, w, h):
        return eta * (1.0 - v) - h

    kin = dict(
        f=f, g=g, phi=phi,
        phi_u=_zero4, phi_v=lambda u, v, w, h: -eta + 0.0 * v,
        phi_w=_zero4, phi_h=lambda u, v, w, h: -1.0 + 0.0 * h,
        psi=_zero4, psi_u=_zero4, psi_v=_zero4, psi_w=_zero4, psi_h=_zero4,
    )
    if indirect:
        kin["Phi"] = lambda w: bv * w / (1.0 + w)
        kin["Phi_prime"] = lambda w: bv / (1.0 + w) ** 2
    else:
        kin["Phi"] = _zero1
        kin["Phi_prime"] = _zero1

    name = "caf_indirect" if indirect else "caf_direct"
    return Kinetics(name=name, producer_active=indirect, **kin)


def make_go_or_grow(params: ModelParams, gg: GoGrowParams) -> Kinetics:
    """Kinetics of the go-or-grow model in four-field form.

    Squared positive parts are implemented as max(., 0)**2 with the one-sided
    derivative 2*max(., 0), the unique C1-consistent choice.  Frame mapping:
    alpha := k5, beta := k7.
    """
    k1, k2, k3, k4 = gg.k1, gg.k2, gg.k3, gg.k4
    k5, k6, k8, k9 = gg.k5, gg.k6, gg.k8, gg.k9

    def f(u, v, w, h):
        return -k1 * u + k2 * h * w / (1.0 + h * w)

    def g(u, v, w, h):
        return k3 * w - k4 * h

    def phi(u, v, w, h):
        return -k5 * (h + w) + k6 * np.maximum(1.0 - v, 0.0) ** 2

    def psi(u, v, w, h):
        return -k8 * h + k9 * np.maximum(1.0 - u - v - w, 0.0) ** 2

    def dpsi_common(u, v, w, h):
        return -2.0 * k9 * np.maximum(1.0 - u - v - w, 0.0)

    return Kinetics(
        name="go_or_grow",
        f=f, g=g, phi=phi, psi=psi, Phi=_zero1, Phi_prime=_zero1,
        phi_u=_zero4,
        phi_v=lambda u, v, w, h: -2.0 * k6 * np.maximum(1.0 - v, 0.0),
        phi_w=lambda u, v, w, h: -k5 + 0.0 * w,
        phi_h=lambda u, v, w, h: -k5 + 0.0 * h,
        psi_u=dpsi_common, psi_v=dpsi_common, psi_w=dpsi_common,
        psi_h=lambda u, v, w, h: -k8 + 0.0 * h,
        producer_active=True,
    )


def _zero_floor(u):
    return 0.0


@dataclass(frozen=True)
class HypothesisBudget:
    """Candidate constants against which the structural conditions are tested.

    The nondecreasing envelopes Cf(v), Cg(v), Cpsi(v) collapse to scalars
    understood as their value at the box's maximal v, which is their worst
    case on the box.  ``f0`` is the one-variable lower envelope of f; the
    default is identically zero.
    """

    c_phi: float
    C_phi: float
    C_Phi: float
    gamma_psi: float
    Cf: float
    Cg: float
    Cpsi: float
    f0: Callable[..., np.ndarray] = _zero_floor

    def __post_init__(self):
        _positive(c_phi=self.c_phi, C_phi=self.C_phi, C_Phi=self.C_Phi,
                  Cf=self.Cf, Cg=self.Cg, Cpsi=self.Cpsi)
        if not 0.0 < self.gamma_psi < 0.5:
            raise ConfigurationError(
                f"gamma_psi must lie in (0, 1/2), got {self.gamma_psi}")
        if not np.all(np.asarray(self.f0(0.0)) >= 0.0):
            raise ConfigurationError("f0(0) must be nonnegative")


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of one inequality on the sampled box."""

    cond_id: str
    passed: bool
    point: tuple[float, float, float, float]
    lhs: float
    rhs: float
    margin: float  # rhs - lhs at the extremal sample (negative on failure)

    def describe(self) -> str:
        status = "pass" if self.passed else "FAIL"
        pt = "(" + ", ".join(f"{x:.6g}" for x in self.point) + ")"
        return (f"{self.cond_id:14s} {status:4s}  margin={self.margin:+.6g}  "
                f"lhs={self.lhs:.6g}  rhs={self.rhs:.6g}  at {pt}")


@dataclass(frozen=True)
class HypothesisReport:
    """Per-condition verdicts; a pass certifies sampled points only."""

    conditions: tuple[ConditionResult, ...]
    box: tuple[float, float, float, float]
    samples: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failures(self) -> tuple[ConditionResult, ...]:
        return tuple(c for c in self.conditions if not c.passed)

    def describe(self) -> str:
        head = (f"hypothesis check on box {self.box} with {self.samples}"
                f" samples per axis\n")
        return head + "\n".join(c.describe() for c in self.conditions)


def _conditions(kin: Kinetics, budget: HypothesisBudget):
    """The inequality battery as (id, lhs(u,v,w,h), rhs(u,v,w,h)) triples."""
    b = budget
    return [
        ("Hf.lower", lambda u, v, w, h: b.f0(u), kin.f),
        ("Hf.upper", kin.f, lambda u, v, w, h: b.Cf * (u + w + 1.0)),
        ("Hg.bound", lambda u, v, w, h: np.abs(kin.g(u, v, w, h)),
         lambda u, v, w, h: b.Cg * (w + h + 1.0)),
        # sign condition g(0, v, w, 0) >= 0, phrased as -g <= 0
        ("Hg.sign", lambda u, v, w, h: -kin.g(0.0 * u, v, w, 0.0 * h),
         lambda u, v, w, h: 0.0),
        ("Hphi.decay", kin.phi, lambda u, v, w, h: -b.c_phi * w + b.C_phi),
        ("Hphi.du", lambda u, v, w, h: np.abs(kin.phi_u(u, v, w, h)),
         lambda u, v, w, h: b.C_phi / np.sqrt(u * v + 1.0)),
        ("Hphi.dv", lambda u, v, w, h: np.abs(kin.phi_v(u, v, w, h)),
         lambda u, v, w, h: b.C_phi / (v + 1.0) + b.C_phi),
        ("Hphi.dw", lambda u, v, w, h: np.abs(kin.phi_w(u, v, w, h)),
         lambda u, v, w, h: b.C_phi / np.sqrt(v + 1.0) + b.C_phi),
        ("Hphi.dh", lambda u, v, w, h: np.abs(kin.phi_h(u, v, w, h)),
         lambda u, v, w, h: b.C_phi / np.sqrt(v + 1.0) + b.C_phi),
        ("HPhi.nonneg", lambda u, v, w, h: -kin.Phi(w), lambda u, v, w, h: 0.0),
        ("HPhi.upper", lambda u, v, w, h: kin.Phi(w), lambda u, v, w, h: b.C_Phi),
        ("HPhi.grad", lambda u, v, w, h: w * kin.Phi_prime(w) ** 2,
         lambda u, v, w, h: b.C_Phi * kin.Phi(w)),
        ("Hpsi.bound", kin.psi, lambda u, v, w, h: b.Cpsi + 0.0 * v),
        ("Hpsi.du", lambda u, v, w, h: np.abs(kin.psi_u(u, v, w, h)),
         lambda u, v, w, h: b.Cpsi / np.sqrt(u * w + 1.0)),
        ("Hpsi.dv", lambda u, v, w, h: np.abs(kin.psi_v(u, v, w, h)),
         lambda u, v, w, h: b.Cpsi + 0.0 * v),
        ("Hpsi.dw", lambda u, v, w, h: np.abs(kin.psi_w(u, v, w, h)),
         lambda u, v, w, h: b.Cpsi / (w + 1.0)),
        ("Hpsi.dh", lambda u, v, w, h: np.abs(kin.psi_h(u, v, w, h)),
         lambda u, v, w, h: b.Cpsi / (w + 1.0) ** b.gamma_psi),
    ]


def _extremal_sample(values: np.ndarray, axes: list[np.ndarray]):
    """Worst sample of a broadcast score array: value plus the (u,v,w,h) point.

    Axes the score does not depend on appear with size 1; the witness uses the
    box origin (coordinate 0) there.
    """
    arr = np.asarray(values)
    if arr.ndim == 0:
        return float(arr), tuple(float(ax[0]) for ax in axes)
    flat = int(np.argmin(arr))
    idx = np.unravel_index(flat, arr.shape)
    point = tuple(
        float(ax[idx[d]]) if arr.shape[d] > 1 else float(ax[0])
        for d, ax in enumerate(axes)
    )
    return float(arr[idx]), point


def check_hypotheses(
    kin: Kinetics,
    budget: HypothesisBudget,
    box: tuple[float, float, float, float],
    n: int,
) -> HypothesisReport:
    """Falsify the structural conditions on the tensor grid over [0,U]x..x[0,H].

    Every inequality (including all partial-derivative bounds and the sign
    condition on g) is evaluated at n**4 sample points via broadcasting; the
    report carries the tightest margin per condition, with a witness point when
    an inequality is violated beyond the relative tolerance ``CHECK_RTOL``.
    Non-finite evaluator output is reported as a separate failure.
    """
    if n < 2:
        raise ValueError("need at least 2 samples per axis")
    if min(box) <= 0:
        raise ValueError("box corners must be positive")

    axes = [np.linspace(0.0, float(corner), n) for corner in box]
    U = axes[0].reshape(n, 1, 1, 1)
    V = axes[1].reshape(1, n, 1, 1)
    W = axes[2].reshape(1, 1, n, 1)
    H = axes[3].reshape(1, 1, 1, n)

    results = []
    for cond_id, lhs_fn, rhs_fn in _conditions(kin, budget):
        lhs = np.asarray(lhs_fn(U, V, W, H), dtype=float)
        rhs = np.asarray(rhs_fn(U, V, W, H), dtype=float)
        bad = ~(np.isfinite(lhs) & np.isfinite(rhs))
        if bad.any():
            score = np.where(bad, -np.inf, 0.0)
            _, point = _extremal_sample(score, axes)
            l, r = _point_values(kin, budget, cond_id, point)
            results.append(ConditionResult(
                cond_id + ".nonfinite", False, point, l, r, float("-inf")))
            continue
        # normalized slack; violation means slack < -CHECK_RTOL somewhere
        slack = (rhs - lhs) / (1.0 + np.abs(rhs))
        worst, point = _extremal_sample(slack, axes)
        l, r = _point_values(kin, budget, cond_id, point)
        results.append(ConditionResult(
            cond_id, worst >= -CHECK_RTOL, point, l, r, r - l))
    return HypothesisReport(tuple(results), tuple(float(c) for c in box), n)


def _point_values(kin: Kinetics, budget: HypothesisBudget, cond_id: str,
                  point) -> tuple[float, float]:
    """Re-evaluate one condition's sides at a single point."""
    base_id = cond_id.removesuffix(".nonfinite")
    table = {cid: (lf, rf) for cid, lf, rf in _conditions(kin, budget)}
    lhs_fn, rhs_fn = table[base_id]
    u, v, w, h = (np.float64(x) for x in point)
    return float(lhs_fn(u, v, w, h)), float(rhs_fn(u, v, w, h))


def verify_witness(kin: Kinetics, budget: HypothesisBudget,
                   result: ConditionResult) -> bool:
    """Re-evaluate a failure's witness; True when the violation reproduces."""
    lhs, rhs = _point_values(kin, budget, result.cond_id, result.point)
    if not (np.isfinite(lhs) and np.isfinite(rhs)):
        return result.cond_id.endswith(".nonfinite")
    return lhs - rhs > CHECK_RTOL * (1.0 + abs(rhs))


def finite_diff_partials(kin: Kinetics, point, step: float) -> dict[str, float]:
    """Central-difference partials of phi and psi plus Phi' at one point.

    Coordinates closer than ``step`` to the domain boundary get the lower
    stencil leg clamped at 0 (a one-sided difference), so the evaluators are
    never probed outside the nonnegative orthant.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    pt = np.asarray(point, dtype=float)
    if (pt < 0).any():
        raise ValueError("point must lie in the nonnegative orthant")

    def diff(fn, base, d):
        hi, lo = base.copy(), base.copy()
        hi[d] += step
        lo[d] = max(lo[d] - step, 0.0)
        return float((fn(*hi) - fn(*lo)) / (hi[d] - lo[d]))

    out: dict[str, float] = {}
    for fname in ("phi", "psi"):
        fn = getattr(kin, fname)
        for d, coord in enumerate("uvwh"):
            out[f"{fname}_{coord}"] = diff(fn, pt, d)
    w_hi = pt[2] + step
    w_lo = max(pt[2] - step, 0.0)
    out["Phi_prime"] = float((kin.Phi(w_hi) - kin.Phi(w_lo)) / (w_hi - w_lo))
    return out
