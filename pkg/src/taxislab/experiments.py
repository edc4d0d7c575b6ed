"""Scenario configuration, run orchestration, the indirect-vs-direct
comparison harness, and parameter sweeps.

Configs are JSON documents; unknown keys anywhere are hard errors so typos
cannot silently fall back to defaults.  Everything downstream of a parsed
config is deterministic, so repeated runs produce byte-identical artifacts.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import itertools
import json
import os
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from . import diagnostics as diag
from .grid import Grid, InitialData, State, StripeSpec, init_scenario, write_snapshot
from .model import (CafParams, ConfigurationError, GoGrowParams, HypothesisBudget,
                    Kinetics, ModelParams, check_hypotheses, make_caf,
                    make_go_or_grow, verify_witness)
from .solver import RunSummary, SolverConfig, simulate

MODEL_NAMES = ("caf_indirect", "caf_direct", "go_or_grow")

GROWTH_HI_DEFAULT = 50.0
GROWTH_LO_DEFAULT = 10.0

SNAPSHOT_FIELDS = ("u", "h", "v", "w")


class ConfigError(ConfigurationError):
    """Schema violation, unknown key, or invariant failure in a config file."""


@dataclass(frozen=True)
class BudgetSpec:
    budget: HypothesisBudget
    box: tuple[float, float, float, float]
    samples: int


@dataclass
class ScenarioConfig:
    """Complete declarative description of one run."""

    model: str
    model_params: ModelParams
    caf: CafParams | None
    go_grow: GoGrowParams | None
    grid: Grid
    initial: InitialData
    solver: SolverConfig
    quasi_energy: diag.QuasiEnergyConfig
    budget_spec: BudgetSpec | None
    output_dir: str | None
    raw: dict = field(repr=False, default_factory=dict)

    def kinetics(self) -> Kinetics:
        if self.model == "go_or_grow":
            return make_go_or_grow(self.model_params, self.go_grow)
        return make_caf(self.model_params, self.caf)

    def initial_state(self) -> State:
        with_producer = self.model != "caf_direct"
        return init_scenario(self.initial, self.grid, with_producer=with_producer)


def _require(d: dict, key: str, path: str, missing: list[str]):
    if key not in d:
        missing.append(f"{path}.{key}" if path else key)
        return None
    return d[key]


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    for key in d:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key {where!r}")


def _build_config(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, {"model", "model_params", "caf", "go_grow", "grid", "initial",
                      "solver", "quasi_energy", "hypothesis_budget", "output_dir"}, "")

    missing: list[str] = []
    model = _require(doc, "model", "", missing)
    mp_doc = _require(doc, "model_params", "", missing)
    solver_doc = _require(doc, "solver", "", missing)
    grid_doc = _require(doc, "grid", "", missing)

    if model is not None:
        if model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")
        block = "go_grow" if model == "go_or_grow" else "caf"
        _require(doc, block, "", missing)
    if isinstance(mp_doc, dict):
        _check_keys(mp_doc, {"chi", "xi", "alpha", "beta", "Du", "Dh"}, "model_params")
        for k in ("chi", "xi", "alpha", "beta", "Du", "Dh"):
            _require(mp_doc, k, "model_params", missing)
    if isinstance(solver_doc, dict):
        _check_keys(solver_doc, {"t_end", "cfl", "dt_max", "lin_tol", "lin_maxiter",
                                 "snapshot_every", "blowup_threshold"}, "solver")
        _require(solver_doc, "t_end", "solver", missing)
    if isinstance(grid_doc, dict):
        _check_keys(grid_doc, {"nx", "ny", "Lx", "Ly"}, "grid")
        _require(grid_doc, "nx", "grid", missing)
        _require(grid_doc, "ny", "grid", missing)
    if missing:
        raise ConfigError("missing required config fields: " + ", ".join(missing))

    mp = ModelParams(**mp_doc)

    # typo-check both model blocks even when one goes unused
    if "go_grow" in doc:
        _check_keys(doc["go_grow"], {f"k{i}" for i in range(1, 10)}, "go_grow")
    if "caf" in doc:
        _check_keys(doc["caf"], {"mu", "eta", "alpha_h", "beta_v", "gamma_w",
                                 "variant"}, "caf")

    caf = gg = None
    if model == "go_or_grow":
        gg = GoGrowParams(**doc["go_grow"])
    else:
        caf_doc = dict(doc["caf"])
        variant = "direct" if model == "caf_direct" else "indirect"
        declared = caf_doc.setdefault("variant", variant)
        if declared != variant:
            raise ConfigError(
                f"caf.variant {declared!r} contradicts model {model!r}")
        caf = CafParams(**caf_doc)

    grid = Grid(**grid_doc)

    init_doc = dict(doc.get("initial", {}))
    _check_keys(init_doc, {"eps_u", "eps_h", "eps_w", "r0", "v_max", "v_min",
                           "centers", "stripes"}, "initial")
    centers = init_doc.pop("centers", {})
    _check_keys(centers, {"u", "h", "w"}, "initial.centers")
    for name in ("u", "h", "w"):
        if name in centers:
            init_doc[f"center_{name}"] = tuple(centers[name])
    stripes_doc = init_doc.pop("stripes", {})
    _check_keys(stripes_doc, {"count", "width", "orientation"}, "initial.stripes")
    init_doc["stripes"] = StripeSpec(**stripes_doc)
    initial = InitialData(**init_doc)

    solver_cfg = SolverConfig(**solver_doc)

    budget_spec = None
    if "hypothesis_budget" in doc:
        b_doc = dict(doc["hypothesis_budget"])
        _check_keys(b_doc, {"c_phi", "C_phi", "C_Phi", "gamma_psi", "Cf", "Cg",
                            "Cpsi", "box", "samples"}, "hypothesis_budget")
        box = tuple(float(x) for x in b_doc.pop("box", (10.0, 2.0, 10.0, 10.0)))
        if len(box) != 4:
            raise ConfigError("hypothesis_budget.box needs 4 corners (U, V, W, H)")
        samples = int(b_doc.pop("samples", 41))
        budget_spec = BudgetSpec(HypothesisBudget(**b_doc), box, samples)

    qe_doc = dict(doc.get("quasi_energy", {}))
    _check_keys(qe_doc, {"a", "b"}, "quasi_energy")
    if "b" not in qe_doc:
        if budget_spec is not None:
            qe_doc["b"] = diag.default_b(mp.Du, mp.beta, mp.xi, mp.alpha,
                                         budget_spec.budget.c_phi)
        else:
            qe_doc["b"] = 0.01
    qe = diag.QuasiEnergyConfig(xi=mp.xi, alpha=mp.alpha,
                                v_floor=solver_cfg.v_floor, **qe_doc)

    return ScenarioConfig(
        model=model, model_params=mp, caf=caf, go_grow=gg, grid=grid,
        initial=initial, solver=solver_cfg, quasi_energy=qe,
        budget_spec=budget_spec, output_dir=doc.get("output_dir"), raw=doc,
    )


def parse_config(path) -> ScenarioConfig:
    """Parse and validate a scenario JSON file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
    try:
        return _build_config(doc)
    except TypeError as exc:
        # dataclass kwargs mismatch surfaces as TypeError; rewrap for the CLI
        raise ConfigError(str(exc)) from exc


def parse_config_dict(doc: dict) -> ScenarioConfig:
    return _build_config(json.loads(json.dumps(doc)))


def preset_path(name: str) -> Path:
    """Filesystem path of a shipped preset such as ``paper_s6``."""
    return Path(resources.files("taxislab").joinpath(f"presets/{name}.json"))


def run_scenario(scenario: ScenarioConfig) -> RunSummary:
    """Build kinetics and initial state, then integrate to the horizon."""
    return simulate(scenario.grid, scenario.initial_state(), scenario.kinetics(),
                    scenario.model_params, scenario.solver, scenario.quasi_energy)


def _snapshot_fields(scenario: ScenarioConfig) -> tuple[str, ...]:
    # the direct variant has no producer field; its snapshots omit w
    if scenario.model == "caf_direct":
        return ("u", "h", "v")
    return SNAPSHOT_FIELDS


def write_run_artifacts(scenario: ScenarioConfig, summary: RunSummary,
                        out_dir: Path) -> dict:
    """Write timeseries.csv, per-snapshot field CSVs, and manifest.json."""
    out_dir.mkdir(parents=True, exist_ok=True)
    diag.write_timeseries(summary.rows, out_dir / "timeseries.csv")
    for snap in summary.snapshots:
        for name in _snapshot_fields(scenario):
            write_snapshot(scenario.grid, getattr(snap.state, name),
                           out_dir / f"{name}_{snap.index:04d}.csv")
    manifest = {
        "config": scenario.raw,
        "status": summary.status,
        "n_steps": summary.n_steps,
        "wall_time": summary.wall_time,
        "growth_ratio": summary.growth_ratio,
        "max_clip_fraction": summary.max_clip_fraction,
        "final_row": {c: getattr(summary.rows[-1], c) for c in diag.CSV_COLUMNS},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def cmd_run(config_path, output_dir=None) -> int:
    """Execute one scenario; exit 0 on completion, 2 on detected blow-up."""
    scenario = parse_config(config_path)
    out = _resolve_out(scenario, config_path, output_dir)
    summary = run_scenario(scenario)
    write_run_artifacts(scenario, summary, out)
    print(f"{scenario.model}: {summary.status} at t={summary.state.t:.6g} "
          f"after {summary.n_steps} steps; ||u||_inf growth "
          f"{summary.growth_ratio:.3g}; artifacts in {out}")
    return 0 if summary.status == "completed" else 2


def _resolve_out(scenario: ScenarioConfig, config_path, output_dir) -> Path:
    if output_dir is not None:
        return Path(output_dir)
    if scenario.output_dir:
        return Path(scenario.output_dir)
    return Path("runs") / Path(config_path).stem


def cmd_check(config_path) -> int:
    """Run the hypothesis checker for the configured model; exit 3 on failure."""
    scenario = parse_config(config_path)
    if scenario.budget_spec is None:
        raise ConfigError("config has no hypothesis_budget section")
    spec = scenario.budget_spec
    report = check_hypotheses(scenario.kinetics(), spec.budget, spec.box,
                              spec.samples)
    print(report.describe())
    for failure in report.failures:
        confirmed = verify_witness(scenario.kinetics(), spec.budget, failure)
        print(f"witness re-evaluation for {failure.cond_id}: "
              f"{'confirmed' if confirmed else 'NOT REPRODUCED'}")
    return 0 if report.passed else 3


@dataclass
class CompareVerdict:
    growth_indirect: float
    growth_direct: float
    dichotomy_holds: bool
    status_indirect: str
    status_direct: str


def _variant_doc(doc: dict, model: str) -> dict:
    out = json.loads(json.dumps(doc))
    out["model"] = model
    caf = dict(out.get("caf", {}))
    caf.pop("variant", None)
    if model == "caf_direct":
        # the control model has no producer field, hence no w-driven sources
        caf["beta_v"] = 0.0
        caf["gamma_w"] = 0.0
    out["caf"] = caf
    out.pop("output_dir", None)
    return out


def _hash_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_compare(config_path, output_dir=None, growth_hi: float = GROWTH_HI_DEFAULT,
                growth_lo: float = GROWTH_LO_DEFAULT) -> int:
    """Run the producer-mediated and direct variants from identical initial
    fields and grade the boundedness dichotomy."""
    base = parse_config(config_path)
    if base.model == "go_or_grow":
        raise ConfigError("compare needs a caf-family config")
    out = _resolve_out(base, config_path, output_dir)
    out.mkdir(parents=True, exist_ok=True)

    results: dict[str, RunSummary] = {}
    scenarios: dict[str, ScenarioConfig] = {}
    for model in ("caf_indirect", "caf_direct"):
        scenario = parse_config_dict(_variant_doc(base.raw, model))
        summary = run_scenario(scenario)
        write_run_artifacts(scenario, summary, out / model)
        results[model] = summary
        scenarios[model] = scenario

    # both variants must start from literally identical u, h, v fields
    for name in ("u", "h", "v"):
        ha = _hash_file(out / "caf_indirect" / f"{name}_0000.csv")
        hb = _hash_file(out / "caf_direct" / f"{name}_0000.csv")
        if ha != hb:
            raise RuntimeError(f"initial {name} snapshots differ between variants")

    verdict = CompareVerdict(
        growth_indirect=results["caf_indirect"].growth_ratio,
        growth_direct=results["caf_direct"].growth_ratio,
        dichotomy_holds=(results["caf_direct"].growth_ratio >= growth_hi
                         and results["caf_indirect"].growth_ratio <= growth_lo),
        status_indirect=results["caf_indirect"].status,
        status_direct=results["caf_direct"].status,
    )
    payload = {
        "growth_indirect": verdict.growth_indirect,
        "growth_direct": verdict.growth_direct,
        "growth_hi": growth_hi,
        "growth_lo": growth_lo,
        "dichotomy_holds": verdict.dichotomy_holds,
        "status_indirect": verdict.status_indirect,
        "status_direct": verdict.status_direct,
        "wall_time_indirect": results["caf_indirect"].wall_time,
        "wall_time_direct": results["caf_direct"].wall_time,
    }
    (out / "compare.json").write_text(json.dumps(payload, indent=2))
    print(f"growth: direct {verdict.growth_direct:.3g} "
          f"({verdict.status_direct}), indirect {verdict.growth_indirect:.3g} "
          f"({verdict.status_indirect}); dichotomy_holds={verdict.dichotomy_holds}")
    return 0 if verdict.dichotomy_holds else 3


def _set_path(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = doc
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def parse_axis(text: str) -> tuple[str, list]:
    """Parse one ``path=v1,v2,...`` sweep axis; values read as JSON literals."""
    path, sep, rest = text.partition("=")
    if not path or not sep:
        raise ConfigError(f"malformed sweep axis {text!r}; expected path=v1,v2,...")
    values = []
    for chunk in rest.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            values.append(json.loads(chunk))
        except json.JSONDecodeError:
            values.append(chunk)
    if not values:
        raise ConfigError(f"empty sweep axis {path!r}")
    return path, values


def _sweep_job(args) -> dict:
    index, doc, out_dir, assignment = args
    row: dict[str, Any] = {"job": index}
    row.update({path: value for path, value in assignment})
    start = time.perf_counter()
    try:
        scenario = parse_config_dict(doc)
        summary = run_scenario(scenario)
        write_run_artifacts(scenario, summary, Path(out_dir))
        series = [(r.t, r.F, r.D) for r in summary.rows]
        fitted = diag.fit_energy_constant(series) if len(series) >= 3 else float("nan")
        row.update(status=summary.status, growth_ratio=summary.growth_ratio,
                   final_F=summary.rows[-1].F, fitted_C=fitted, error="")
    except Exception as exc:  # failures are data, not sweep aborts
        row.update(status="error", growth_ratio=float("nan"),
                   final_F=float("nan"), fitted_C=float("nan"), error=str(exc))
    row["wall_time"] = time.perf_counter() - start
    return row


def cmd_sweep(config_path, axes: list[str], output_dir=None,
              jobs: int | None = None) -> int:
    """Cartesian-product parameter sweep; one aggregate row per job."""
    base = parse_config(config_path)  # validate before spawning anything
    parsed = [parse_axis(a) for a in axes]
    if not parsed:
        raise ConfigError("sweep needs at least one --axis")
    out = _resolve_out(base, config_path, output_dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = []
    for index, combo in enumerate(itertools.product(*(vals for _, vals in parsed))):
        doc = json.loads(json.dumps(base.raw))
        assignment = tuple(zip((p for p, _ in parsed), combo))
        for path, value in assignment:
            _set_path(doc, path, value)
        doc.pop("output_dir", None)
        tasks.append((index, doc, str(out / f"job_{index:04d}"), assignment))

    if jobs is None:
        jobs = int(os.environ.get("TAXISLAB_JOBS", "0")) or (os.cpu_count() or 1)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_job, tasks))
    else:
        rows = [_sweep_job(t) for t in tasks]

    columns = ["job"] + [p for p, _ in parsed] + \
        ["status", "growth_ratio", "final_F", "fitted_C", "wall_time", "error"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(row.get(c, "")) for c in columns) + "\n")
    print(f"sweep finished: {len(rows)} jobs, aggregate in {out / 'sweep.csv'}")
    return 0


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    text = str(value)
    if "," in text or '"' in text:
        text = '"' + text.replace('"', '""') + '"'
    return text
