import logging
import math

import numpy as np
import pytest
import sympy as sp

from laxlab.fields import GridSpec, ScalarField, T, X
from laxlab.sine_gordon import (
    CFLError,
    KinkParams,
    SGState,
    coefficients_from_phi,
    degenerate_metric,
    energy,
    energy_series,
    evolve,
    kink,
    kink_expr,
    kink_field,
    write_phi_csv,
)
from laxlab.structure import curvatures


def test_kink_values():
    p = KinkParams()
    assert kink(0.0, 0.0, p) == pytest.approx(math.pi, abs=1e-15)
    assert kink(1.0, 0.0, p) == pytest.approx(4 * math.atan(math.e), abs=1e-15)
    assert kink(1.0, 0.0, p) == pytest.approx(4.8731, abs=1e-4)
    assert kink(60.0, 0.0, p) == pytest.approx(2 * math.pi, abs=1e-12)
    assert kink(-60.0, 0.0, p) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("v", [1.0, -1.0, 1.5])
def test_superluminal_kink_rejected(v):
    with pytest.raises(ValueError):
        KinkParams(v=v)


@pytest.mark.parametrize("v", [0.0, 0.5, -0.8])
def test_kink_solves_pde_symbolically(v):
    phi = kink_expr(KinkParams(v=v, x0=0.3))
    res = sp.lambdify((X, T), sp.diff(phi, T, 2) - sp.diff(phi, X, 2) + sp.sin(phi))
    pts = np.linspace(-3, 3, 13)
    assert np.abs(res(pts, 0.7 * pts + 0.1)).max() <= 1e-12


def test_kink_solves_pde_finite_difference_oracle():
    def worst(h):
        x = np.linspace(-4, 4, 161)[:, None]
        t = 0.25
        p = KinkParams(v=0.5)
        f = lambda xx, tt: kink(xx, tt, p)  # noqa: E731
        phi_tt = (f(x, t + h) - 2 * f(x, t) + f(x, t - h)) / h**2
        phi_xx = (f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / h**2
        return np.abs(phi_tt - phi_xx + np.sin(f(x, t))).max()

    a, b = worst(1e-2), worst(5e-3)
    assert a < 1e-4 and 3.5 < a / b < 4.5


def test_reduced_equation_identities():
    grid = GridSpec(-3.0, 3.0, 0.0, 2.0, 41, 21)
    for v in (0.0, 0.6):
        phi = kink_field(grid, KinkParams(v=v))
        e = phi.expr
        first = sp.diff(sp.cos(e / 2), X) + sp.diff(e, X) / 2 * sp.sin(e / 2)
        second = -sp.diff(sp.sin(e / 2), T) + sp.cos(e / 2) * sp.diff(e, T) / 2
        for expr in (first, second):
            vals = ScalarField.from_expr(grid, expr).values
            assert np.abs(vals).max() <= 1e-12


def test_coefficients_from_static_kink():
    grid = GridSpec(-1.0, 1.0, 0.0, 1.0, 21, 11)
    c, s = coefficients_from_phi(kink_field(grid, KinkParams()))
    vals = [f.values[0, 10] for f in c.fields()]
    assert np.allclose(vals, [0, 0, 1, 0, 1, 0], atol=1e-15)
    assert all(f.has_closed_form for f in c.fields())
    assert np.all(curvatures(s).K.values == 1.0)


def test_coefficients_from_zero_phi():
    grid = GridSpec(-1.0, 1.0, 0.0, 1.0, 11, 11)
    c, s = coefficients_from_phi(ScalarField(grid, np.zeros(grid.shape)))
    assert np.all(c.u12.values == 1.0)
    assert all(np.all(f.values == 0) for f in c.fields()[1:])
    assert np.all(curvatures(s).K.values == 1.0)


def grid_for(dx, x=(-10.0, 10.0), T_end=1.0, cfl=0.5):
    nx = int(round((x[1] - x[0]) / dx)) + 1
    nt = int(round(T_end / (cfl * dx))) + 1
    return GridSpec(x[0], x[1], 0.0, T_end, nx, nt)


def kink_error(grid, p):
    phi = evolve(SGState.from_kink(grid, p))
    xx, tt = grid.mesh()
    return np.abs(phi.values - kink(xx, tt, p)).max()


def test_evolve_static_kink():
    assert kink_error(grid_for(0.01), KinkParams()) <= 5e-4


def test_evolve_zero_stays_zero():
    phi = evolve(SGState.zero(grid_for(0.05)))
    assert np.all(phi.values == 0)


def test_scheme_second_order():
    p = KinkParams(v=0.5)
    e1 = kink_error(grid_for(0.04, T_end=2.0), p)
    e2 = kink_error(grid_for(0.02, T_end=2.0), p)
    assert 3.2 <= e1 / e2 <= 4.8


def test_taylor_start_matches_exact_second_level():
    grid = grid_for(0.02)
    p = KinkParams(v=0.3)
    taylor = SGState.from_kink(grid, p)
    exact = SGState(grid, taylor.phi0, taylor.left, taylor.right,
                    phi1=kink(grid.x, grid.t[1], p))
    a, b = evolve(taylor).values, evolve(exact).values
    assert np.abs(a - b).max() <= 1e-5


def test_cfl_violation():
    g = GridSpec(-1.0, 1.0, 0.0, 1.0, 21, 11)  # dt = dx
    with pytest.raises(CFLError):
        SGState.zero(g)


def test_partial_evolution_grid():
    grid = grid_for(0.05)
    phi = evolve(SGState.zero(grid), n_steps=5)
    assert phi.grid.nt == 6 and phi.grid.t_max == pytest.approx(grid.t[5])


def test_nan_detection():
    grid = GridSpec(-1.0, 1.0, 0.0, 0.5, 21, 11)
    state = SGState(grid, np.full(21, -1e308), 0.0, 0.0, phi1=np.full(21, 1e308))
    with pytest.raises(FloatingPointError, match="step"):
        with np.errstate(over="ignore", invalid="ignore"):
            evolve(state)


def test_energy_zero():
    g = grid_for(0.1)
    z = np.zeros(g.nx)
    assert energy(z, z, g) == 0.0


def test_static_kink_energy():
    g = GridSpec(-20.0, 20.0, 0.0, 1.0, 4001, 3)
    phi = kink(g.x, 0.0, KinkParams())
    assert energy(phi, phi, g) == pytest.approx(8.0, abs=1e-4)


@pytest.mark.parametrize("v", [0.3, 0.5])
def test_moving_kink_energy(v):
    g = GridSpec(-20.0, 20.0, 0.0, 1.0, 4001, 201)
    p = KinkParams(v=v)
    e = energy(kink(g.x, g.t[1], p), kink(g.x, g.t[0], p), g)
    assert e == pytest.approx(8.0 / math.sqrt(1 - v * v), abs=1e-3)


def test_energy_drift_moving_kink():
    grid = grid_for(0.01, T_end=2.0)
    _, e = energy_series(evolve(SGState.from_kink(grid, KinkParams(v=0.5))))
    assert np.abs(e - e[0]).max() / e[0] <= 1e-3


def test_degeneracy_guard(caplog):
    grid = GridSpec(-2.0, 2.0, 0.0, 1.0, 41, 11)
    with caplog.at_level(logging.WARNING):
        assert degenerate_metric(kink_field(grid, KinkParams()))
    assert "degenerate" in caplog.text
    far = GridSpec(1.0, 2.0, 0.0, 1.0, 11, 11)
    assert not degenerate_metric(kink_field(far, KinkParams()))


def test_phi_csv(tmp_path):
    g = GridSpec(0.0, 1.0, 0.0, 1.0, 3, 3)
    path = tmp_path / "phi.csv"
    write_phi_csv(path, ScalarField(g, np.arange(9.0).reshape(3, 3) / 3))
    lines = path.read_text().splitlines()
    assert lines[0] == "x,t,phi" and len(lines) == 10
    assert lines[2] == "0.5,0.0,0.3333333333333333"
