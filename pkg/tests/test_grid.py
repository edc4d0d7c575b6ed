import numpy as np
import pytest

from taxislab.grid import (Grid, InitialData, StripeSpec, face_gradients,
                           init_scenario, integrate, laplacian_neumann,
                           stripe_mask, write_snapshot)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(2, 2)  # below the 16-cell minimum
    with pytest.raises(ValueError):
        Grid(16, 16, Lx=-1.0)
    g = Grid(64, 1)  # 1-D column layouts are allowed
    assert g.dy == 1.0 and g.dx == pytest.approx(1 / 64)


def test_laplacian_constant_is_zero():
    g = Grid(16, 16)
    f = np.full(g.shape, 3.7)
    assert np.max(np.abs(laplacian_neumann(g, f))) == 0.0


def _cos_mode(g: Grid) -> np.ndarray:
    X, Y = g.cell_centers()
    return np.cos(np.pi * X) * np.cos(np.pi * Y)


def test_laplacian_second_order_convergence():
    errs = {}
    for n in (64, 128):
        g = Grid(n, n)
        f = _cos_mode(g)
        exact = -2.0 * np.pi**2 * f
        errs[n] = np.max(np.abs(laplacian_neumann(g, f) - exact))
    factor = errs[64] / errs[128]
    assert 3.5 <= factor <= 4.5


def test_laplacian_conserves_mass():
    rng = np.random.default_rng(7)
    g = Grid(32, 24)
    f = rng.standard_normal(g.shape)
    total = integrate(g, laplacian_neumann(g, f))
    assert abs(total) <= 1e-12 * np.max(np.abs(f))


def test_laplacian_self_adjoint_and_semidefinite():
    rng = np.random.default_rng(11)
    g = Grid(20, 12)
    for _ in range(5):
        f = rng.standard_normal(g.shape)
        h = rng.standard_normal(g.shape)
        lf, lh = laplacian_neumann(g, f), laplacian_neumann(g, h)
        ip_fg = np.sum(lf * h)
        ip_gf = np.sum(f * lh)
        assert abs(ip_fg - ip_gf) <= 1e-12 * max(abs(ip_fg), 1.0)
        quad = np.sum(laplacian_neumann(g, f) * f)
        assert quad <= 1e-12 * np.sum(f * f)


def test_face_gradients_constant_and_linear():
    g = Grid(8, 8)
    gx, gy = face_gradients(g, np.full(g.shape, 2.5))
    assert np.all(gx == 0.0) and np.all(gy == 0.0)

    X, _ = g.cell_centers()
    gx, gy = face_gradients(g, X)
    assert np.max(np.abs(gx[:, 1:-1] - 1.0)) <= 1e-12
    assert np.all(gx[:, 0] == 0.0) and np.all(gx[:, -1] == 0.0)
    assert np.all(gy == 0.0)


def test_face_gradient_quadratic_hand_value():
    # dx = 0.25: face between centers 0.125 and 0.375 of f = x^2
    g = Grid(4, 4)
    X, _ = g.cell_centers()
    gx, _ = face_gradients(g, X**2)
    assert gx[0, 1] == pytest.approx((0.140625 - 0.015625) / 0.25)
    assert gx[0, 1] == pytest.approx(0.5)


def test_integrate_constants_exact():
    g = Grid(32, 8)
    assert integrate(g, np.ones(g.shape)) == pytest.approx(1.0, abs=1e-15)
    assert integrate(g, np.full(g.shape, 2.0)) == pytest.approx(2.0, abs=1e-15)


def test_integrate_gaussian_against_refined_quadrature():
    # oracle: midpoint quadrature of the analytic density at 10x resolution
    eps = 0.05
    fine = Grid(2560, 2560)
    Xf, Yf = fine.cell_centers()
    dens = np.exp(-((Xf - 0.5) ** 2 + (Yf - 0.5) ** 2) / (2 * eps))
    oracle = float(np.sum(dens)) * fine.cell_area

    g = Grid(256, 256)
    st = init_scenario(InitialData(eps_u=eps), g)
    assert integrate(g, st.u) == pytest.approx(oracle, rel=1e-4)


def test_init_scenario_exact_values():
    # centers placed on actual cell centers so the peaks are sampled exactly
    g = Grid(16, 16)
    c = (8.5 / 16, 8.5 / 16)
    init = InitialData(center_u=c, center_h=c, center_w=c, r0=0.5)
    st = init_scenario(init, g)
    j = i = 8  # cell centered at c
    assert st.u[j, i] == 1.0
    assert st.h[j, i] == 1.0
    assert st.w[j, 0] == 1.0  # cell at horizontal distance exactly r0

    mask = stripe_mask(g, init.stripes)
    assert st.v[mask].min() == 1.0 and st.v[mask].max() == 1.0
    assert st.v[~mask].min() == 0.2 and st.v[~mask].max() == 0.2


def test_init_scenario_state_invariants():
    g = Grid(48, 48)
    st = init_scenario(InitialData(), g)
    assert st.u.min() >= 0 and st.h.min() >= 0 and st.w.min() >= 0
    assert st.v.min() >= 0.2
    assert st.t == 0.0
    st.validate(g)


def test_init_scenario_direct_model_zeroes_producer():
    g = Grid(16, 16)
    st = init_scenario(InitialData(), g, with_producer=False)
    assert np.all(st.w == 0.0)


def test_degenerate_stripes_warn():
    g = Grid(16, 16)
    with pytest.warns(UserWarning):
        init_scenario(InitialData(stripes=StripeSpec(count=0, width=0.1)), g)


def test_snapshot_roundtrip(tmp_path):
    g = Grid(5, 4)
    rng = np.random.default_rng(3)
    f = rng.standard_normal(g.shape)
    path = tmp_path / "u_0000.csv"
    write_snapshot(g, f, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x,y,value"
    assert len(lines) == 1 + g.nx * g.ny
    # row-major order: x varies fastest
    x0, y0, v0 = (float(s) for s in lines[1].split(","))
    x1, y1, v1 = (float(s) for s in lines[2].split(","))
    assert y0 == y1 and x1 > x0
    vals = np.array([float(l.split(",")[2]) for l in lines[1:]]).reshape(g.shape)
    assert np.array_equal(vals, f)
