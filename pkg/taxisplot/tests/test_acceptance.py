"""Acceptance: render the comparison harness's run pair through the public
CLIs only (the simulator is driven as an installed command, its artifacts
consumed from disk)."""

import shutil
import subprocess
import sys

import pytest
from PIL import Image


def _report(num: int, desc: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    line = f"[criterion {num:2d}] {status}: {desc}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="session")
def compare_artifacts(tmp_path_factory):
    taxislab = shutil.which("taxislab")
    if taxislab is None:
        pytest.skip("taxislab CLI not installed")
    out = tmp_path_factory.mktemp("compare")
    preset = subprocess.run(
        [sys.executable, "-c",
         "from taxislab.experiments import preset_path; print(preset_path('paper_s6'))"],
        check=True, capture_output=True, text=True).stdout.strip()
    proc = subprocess.run([taxislab, "compare", preset, "--out", str(out)],
                          capture_output=True, text=True, timeout=590)
    assert proc.returncode == 0, proc.stderr
    return out


def test_criterion_10_panel_grids(compare_artifacts, tmp_path):
    taxisplot = shutil.which("taxisplot")
    assert taxisplot is not None

    sizes = {}
    for model, ncols in (("caf_indirect", 4), ("caf_direct", 3)):
        out_file = tmp_path / f"{model}.png"
        proc = subprocess.run(
            [taxisplot, "panels", str(compare_artifacts / model),
             "--out", str(out_file)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert out_file.exists() and out_file.stat().st_size > 0
        with Image.open(out_file) as img:
            sizes[model] = img.size
        assert sizes[model] == (250 * ncols, 250 * 5)

    _report(10, "panel grids render 5x4 (producer-mediated) and 5x3 (direct) "
            "at the declared pixel dimensions",
            sizes["caf_indirect"] == (1000, 1250)
            and sizes["caf_direct"] == (750, 1250),
            f"{sizes}")


def test_series_figures_render_from_real_runs(compare_artifacts, tmp_path):
    taxisplot = shutil.which("taxisplot")
    for target in ("caf_indirect", "caf_direct", ""):
        run_dir = compare_artifacts / target if target else compare_artifacts
        out_file = tmp_path / f"series_{target or 'overlay'}.png"
        proc = subprocess.run(
            [taxisplot, "series", str(run_dir), "--out", str(out_file)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert out_file.exists() and out_file.stat().st_size > 0
