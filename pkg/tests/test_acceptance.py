"""Acceptance suite: one test per criterion, each printing a pass/fail line.

The expensive artifacts (the comparison harness on the shipped preset, the
1000-step conservation run) are produced once per session and shared.
"""

import json
import math
import re
import time

import numpy as np
import pytest

from taxislab.diagnostics import fit_energy_constant, v_bound_check
from taxislab.experiments import (cmd_check, cmd_compare, cmd_run, parse_config,
                                  preset_path)
from taxislab.grid import Grid, face_gradients, integrate, laplacian_neumann
from taxislab.model import check_hypotheses, verify_witness
from taxislab.solver import implicit_diffusion, step


def _report(num: int, desc: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    line = f"[criterion {num:2d}] {status}: {desc}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _read_timeseries(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [dict(zip(header, (float(x) for x in line.split(","))))
            for line in lines[1:]]
    return rows


@pytest.fixture(scope="session")
def preset():
    return preset_path("paper_s6")


@pytest.fixture(scope="session")
def compare_dir(tmp_path_factory, preset):
    out = tmp_path_factory.mktemp("compare")
    started = time.perf_counter()
    code = cmd_compare(preset, out)
    elapsed = time.perf_counter() - started
    verdict = json.loads((out / "compare.json").read_text())
    return {"dir": out, "exit": code, "verdict": verdict, "elapsed": elapsed}


@pytest.fixture(scope="session")
def thousand_steps(preset):
    scenario = parse_config(preset)
    grid = scenario.grid
    kin = scenario.kinetics()
    state = scenario.initial_state()
    mass0 = integrate(grid, state.u)
    max_clip_frac = 0.0
    started = time.perf_counter()
    for _ in range(1000):
        state, rep = step(state, kin, scenario.model_params, scenario.solver, grid)
        total = (integrate(grid, state.u) + integrate(grid, state.h)
                 + integrate(grid, state.w))
        max_clip_frac = max(max_clip_frac, rep.clipped_mass / total)
    elapsed = time.perf_counter() - started
    drift = abs(integrate(grid, state.u) - mass0) / mass0
    return {"drift": drift, "max_clip_frac": max_clip_frac, "elapsed": elapsed}


def test_criterion_1_operator_convergence():
    started = time.perf_counter()
    errs = {}
    for n in (64, 128):
        g = Grid(n, n)
        X, Y = g.cell_centers()
        f = np.cos(np.pi * X) * np.cos(np.pi * Y)
        errs[n] = np.max(np.abs(laplacian_neumann(g, f) + 2 * np.pi**2 * f))
    factor = errs[64] / errs[128]

    g = Grid(64, 64)
    X, Y = g.cell_centers()
    gx, gy = face_gradients(g, 2.0 * X - 0.5 * Y)
    linear_err = max(np.max(np.abs(gx[:, 1:-1] - 2.0)),
                     np.max(np.abs(gy[1:-1, :] + 0.5)))
    elapsed = time.perf_counter() - started
    _report(1, "Laplacian converges at second order; face gradients exact on "
            "linear fields",
            3.5 <= factor <= 4.5 and linear_err <= 1e-12 and elapsed < 5.0,
            f"factor={factor:.3f}, linear_err={linear_err:.2e}, {elapsed:.2f}s")


def test_criterion_2_conservation(thousand_steps):
    r = thousand_steps
    _report(2, "1000-step cell-mass drift within 1e-6 on the proliferation-free "
            "preset",
            r["drift"] <= 1e-6 and r["elapsed"] < 60.0,
            f"drift={r['drift']:.2e}, {r['elapsed']:.1f}s")


def test_criterion_3_positivity_audit(thousand_steps):
    r = thousand_steps
    _report(3, "per-step clipped mass at most 1e-10 of total mass at CFL 0.45",
            r["max_clip_frac"] <= 1e-10,
            f"max clip fraction={r['max_clip_frac']:.2e}")


def test_criterion_4_hypothesis_dichotomy(preset, tmp_path, capsys):
    started = time.perf_counter()
    code_indirect = cmd_check(preset)
    out_indirect = capsys.readouterr().out
    hg_indirect_ok = (code_indirect == 0
                      and re.search(r"Hg\.bound\s+pass", out_indirect))

    direct_doc = json.loads(preset.read_text())
    direct_doc["model"] = "caf_direct"
    direct_doc["caf"]["beta_v"] = 0.0
    direct_doc["caf"]["gamma_w"] = 0.0
    direct_path = tmp_path / "direct.json"
    direct_path.write_text(json.dumps(direct_doc))
    code_direct = cmd_check(direct_path)
    out_direct = capsys.readouterr().out
    witness_printed = (code_direct == 3
                       and re.search(r"Hg\.bound\s+FAIL", out_direct)
                       and "witness re-evaluation for Hg.bound: confirmed"
                       in out_direct)

    # independent re-evaluation of the printed witness through the API
    scenario = parse_config(preset)
    spec = scenario.budget_spec
    from taxislab.experiments import parse_config_dict
    direct_sc = parse_config_dict(direct_doc)
    direct_report = check_hypotheses(direct_sc.kinetics(), spec.budget, spec.box,
                                     spec.samples)
    hg_direct = {c.cond_id: c for c in direct_report.conditions}["Hg.bound"]
    witness_ok = (not hg_direct.passed
                  and verify_witness(direct_sc.kinetics(), spec.budget, hg_direct))
    elapsed = time.perf_counter() - started
    _report(4, "signal-growth bound Hg passes for producer-mediated kinetics and "
            "fails for the direct variant with a confirmed witness",
            hg_indirect_ok and witness_printed and witness_ok and elapsed < 10.0,
            f"witness at {hg_direct.point}, lhs={hg_direct.lhs:.3g} > "
            f"rhs={hg_direct.rhs:.3g}, {elapsed:.1f}s")


def test_criterion_5_boundedness_dichotomy(compare_dir):
    v = compare_dir["verdict"]
    ok = (v["dichotomy_holds"] and v["growth_direct"] >= 50.0
          and v["growth_indirect"] <= 10.0 and compare_dir["elapsed"] < 600.0
          and compare_dir["exit"] == 0)
    _report(5, "direct variant grows at least 50x while the producer-mediated "
            "variant stays within 10x",
            ok,
            f"direct={v['growth_direct']:.1f}x, indirect="
            f"{v['growth_indirect']:.2f}x, {compare_dir['elapsed']:.0f}s")


def test_criterion_6_quasi_energy_consistency(compare_dir):
    rows = _read_timeseries(compare_dir["dir"] / "caf_indirect" / "timeseries.csv")
    series = [(r["t"], r["F"], r["D"]) for r in rows]
    fitted = fit_energy_constant(series)
    f0 = rows[0]["F"]
    f_bound = 5.0 * max(f0, 1.0)
    f_ok = all(r["F"] <= f_bound for r in rows)

    t1 = np.arange(0.0, 100.0 + 1e-9, 0.1)
    c_sqrt50 = fit_energy_constant([(t, 1.0, t) for t in t1])
    t2 = np.linspace(0.0, 1.0, 11)
    c_unit = fit_energy_constant([(t, 0.0, 1.0) for t in t2])
    oracles_ok = (abs(c_sqrt50 - math.sqrt(50.0)) <= 0.01
                  and abs(c_unit - 1.0) <= 1e-3)

    _report(6, "energy inequality admits a finite constant and F stays within "
            "5x of its initial value; synthetic fitter oracles match",
            math.isfinite(fitted) and fitted <= 1e6 and f_ok and oracles_ok,
            f"C={fitted:.4g}, maxF={max(r['F'] for r in rows):.3g} <= {f_bound:.3g}, "
            f"sqrt50 fit={c_sqrt50:.4f}, unit fit={c_unit:.4f}")


def test_criterion_7_tissue_bound(compare_dir):
    rows = _read_timeseries(compare_dir["dir"] / "caf_indirect" / "timeseries.csv")
    series = [(r["t"], r["max_v"]) for r in rows]
    out = v_bound_check(series, v0_max=rows[0]["max_v"], C_phi=10.6, C_Phi=1.0,
                        slack=0.05)
    _report(7, "tissue sup-norm stays under the comparison envelope "
            "(C_phi=10.6, C_Phi=1, 5% slack)",
            out.passed, f"worst ratio={out.worst_ratio:.3f}")


def test_criterion_8_eigenmode_diffusion():
    n, D, dt = 64, 0.25, 0.01
    g = Grid(n, 1)
    scenario = parse_config(preset_path("paper_s6"))
    cfg = scenario.solver
    worst = 0.0
    for k in (1, 3, 7):
        f = np.cos(np.pi * k * (np.arange(n) + 0.5) / n).reshape(1, n)
        mu = 2.0 * (1.0 - np.cos(np.pi * k / n)) / g.dx**2
        expected = f / (1.0 + dt * D * mu)
        out = implicit_diffusion(g, f, D=D, dt=dt, cfg=cfg)
        worst = max(worst, float(np.linalg.norm(out - expected)
                                 / np.linalg.norm(f)))
    _report(8, "implicit diffusion reproduces the discrete eigenmode decay "
            "factors to lin_tol",
            worst <= cfg.lin_tol, f"worst rel err={worst:.2e}")


def test_criterion_9_determinism(tmp_path, preset):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cmd_run(preset, a) == 0
    assert cmd_run(preset, b) == 0
    same = (a / "timeseries.csv").read_bytes() == (b / "timeseries.csv").read_bytes()
    _report(9, "repeated runs produce byte-identical timeseries.csv", same)
