import numpy as np
import pytest
from PIL import Image

from taxisplot.io import ArtifactError, discover_snapshots, read_snapshot
from taxisplot.panels import FigureSpec, render_panels


def write_snapshot(path, values: np.ndarray):
    ny, nx = values.shape
    xs = (np.arange(nx) + 0.5) / nx
    ys = (np.arange(ny) + 0.5) / ny
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        for j in range(ny):
            for i in range(nx):
                fh.write(f"{xs[i]:.17g},{ys[j]:.17g},{values[j, i]:.17g}\n")


def fake_run(tmp_path, fields=("u", "h", "v", "w"), n_snaps=5, shape=(8, 8)):
    rng = np.random.default_rng(0)
    run = tmp_path / "run"
    run.mkdir()
    for f in fields:
        for k in range(n_snaps):
            write_snapshot(run / f"{f}_{k:04d}.csv", rng.uniform(0, 1 + k, shape))
    return run


def test_discover_and_read_roundtrip(tmp_path):
    run = fake_run(tmp_path, n_snaps=2)
    found = discover_snapshots(run)
    assert sorted(found) == ["h", "u", "v", "w"]
    assert found["u"] == [0, 1]
    arr = read_snapshot(run / "u_0000.csv")
    assert arr.shape == (8, 8)


def test_read_snapshot_errors_name_the_file(tmp_path):
    bad = tmp_path / "u_0000.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(ArtifactError, match="u_0000.csv"):
        read_snapshot(bad)
    ragged = tmp_path / "h_0000.csv"
    ragged.write_text("x,y,value\n0.5,0.5,1.0\n0.5,0.5\n")
    with pytest.raises(ArtifactError, match="line 3"):
        read_snapshot(ragged)


def test_panel_grid_five_by_four(tmp_path):
    run = fake_run(tmp_path)
    spec = FigureSpec.from_run(run)
    assert spec.fields == ("u", "v", "h", "w")
    assert len(spec.snapshots) == 5
    out = render_panels(spec)
    assert out.exists() and out.stat().st_size > 0
    with Image.open(out) as img:
        assert img.size == spec.pixel_size
    assert spec.pixel_size == (250 * 4, 250 * 5)


def test_panel_grid_without_producer_field(tmp_path):
    run = fake_run(tmp_path, fields=("u", "h", "v"))
    spec = FigureSpec.from_run(run)
    assert spec.fields == ("u", "v", "h")
    out = render_panels(spec)
    with Image.open(out) as img:
        assert img.size == (250 * 3, 250 * 5)


def test_single_panel(tmp_path):
    run = fake_run(tmp_path, fields=("u",), n_snaps=1)
    spec = FigureSpec.from_run(run)
    out = render_panels(spec)
    with Image.open(out) as img:
        assert img.size == (250, 250)


def test_snapshot_selection_and_missing_index(tmp_path):
    run = fake_run(tmp_path)
    spec = FigureSpec.from_run(run, snapshots=(0, 2, 4))
    assert len(spec.snapshots) == 3
    with pytest.raises(ArtifactError, match="9"):
        FigureSpec.from_run(run, snapshots=(0, 9))
    with pytest.raises(ArtifactError, match="z"):
        FigureSpec.from_run(run, fields=("u", "z"))


def test_rendering_is_read_only(tmp_path):
    run = fake_run(tmp_path, n_snaps=2)
    before = {p.name: p.read_bytes() for p in run.iterdir()}
    render_panels(FigureSpec.from_run(run, out_path=tmp_path / "o.png"))
    after = {p.name: p.read_bytes() for p in run.iterdir()}
    assert before == after


def test_pixel_dimensions_reproducible(tmp_path):
    run = fake_run(tmp_path, n_snaps=2)
    a = render_panels(FigureSpec.from_run(run, out_path=tmp_path / "a.png"))
    b = render_panels(FigureSpec.from_run(run, out_path=tmp_path / "b.png"))
    with Image.open(a) as ia, Image.open(b) as ib:
        assert ia.size == ib.size
