import numpy as np
import pytest

from conftest import constant_scenario, kink_scenario
from laxlab.algebra import rodrigues_exp, skew_from_triple
from laxlab.fields import GridSpec, sample_family
from laxlab.frame import (
    DegenerateMeshError,
    SurfaceMesh,
    connection_triples,
    discrete_forms,
    path_defect,
    propagate_frames,
    reconstruct_surface,
)
from laxlab.structure import first_fundamental_coeffs


@pytest.fixture
def seed():
    return rodrigues_exp((0.3, -1.1, 0.7))


def test_zero_scenario_keeps_seed(small_grid, seed):
    ff = propagate_frames(*sample_family({"name": "zero"}, small_grid), seed)
    assert np.all(ff.frames == seed)


def test_bad_seed_rejected(small_grid):
    with pytest.raises(ValueError):
        propagate_frames(*sample_family({"name": "zero"}, small_grid), np.diag([2.0, 1, 1]))
    with pytest.raises(ValueError):
        propagate_frames(*sample_family({"name": "zero"}, small_grid), -np.eye(3))


def test_constant_connection_matches_exponential(seed):
    c_val = 0.8
    grid = GridSpec(0.0, 1.0, 0.0, 3.0, 5, 301)
    # Omega_t = skew(u23, h11 u12 + h u13, h u12 + h22 u13) = skew(0, 0, c)
    c, s = constant_scenario(grid, u13=1.0, h22=c_val)
    ff = propagate_frames(c, s, seed)
    for n, t in enumerate(grid.t):
        want = rodrigues_exp((0.0, 0.0, t * c_val)) @ seed
        assert np.abs(ff.frames[n] - want).max() <= 1e-10


def test_orthonormality_after_many_steps():
    grid = GridSpec(-2.0, 2.0, 0.0, 20.0, 3, 10001)
    c, s = sample_family({"name": "sine_gordon_kink", "v": 0.4}, grid)
    ff = propagate_frames(c, s)
    assert ff.defect() <= 1e-10 and ff.determinant_error() <= 1e-10


def test_path_defect_zero(small_grid):
    assert path_defect(*sample_family({"name": "zero"}, small_grid)) == 0.0


def test_path_defect_second_order_and_discriminates():
    d = [path_defect(*kink_scenario(n)) for n in (51, 101, 201)]
    assert 3.5 < d[0] / d[1] < 4.5 and 3.5 < d[1] / d[2] < 4.5
    c, s = kink_scenario(201)
    grown = [path_defect(c.replace(u23=(1 + eps) * c.u23), s) for eps in (0.01, 0.02, 0.04)]
    assert grown[0] >= 10 * d[2]
    assert grown[0] < grown[1] < grown[2]
    assert 1.8 < grown[1] / grown[0] < 2.2  # proportional to the violation


def test_reconstruct_zero(small_grid):
    c, s = sample_family({"name": "zero"}, small_grid)
    mesh = reconstruct_surface(propagate_frames(c, s), c)
    assert np.all(mesh.points == 0)


def test_reconstruct_straight_line(small_grid):
    c, s = constant_scenario(small_grid, u12=1.0)
    mesh = reconstruct_surface(propagate_frames(c, s), c)
    t = small_grid.t - small_grid.t_min
    want = t[:, None, None] * np.array([1.0, 0.0, 0.0])
    assert np.allclose(mesh.points, np.broadcast_to(want, mesh.points.shape), atol=1e-15)
    with pytest.raises(DegenerateMeshError):
        discrete_forms(mesh)


def test_kink_surface_lies_on_unit_sphere():
    # h11 = h22 = 1, h = 0 gives d(x + e3) = 0
    c, s = kink_scenario(201)
    mesh = reconstruct_surface(propagate_frames(c, s), c)
    centre = mesh.points + mesh.normals
    spread = np.ptp(centre.reshape(-1, 3), axis=0).max()
    assert spread <= 1e-4


def test_frame_follows_connection():
    c, s = kink_scenario(201, v=0.5)
    ff = propagate_frames(c, s)
    E = ff.frames
    dt = c.grid.dt
    dEdt = (E[2:, 1:-1] - E[:-2, 1:-1]) / (2 * dt)
    omega_t, _ = connection_triples(c, s)
    om = skew_from_triple(tuple(a[1:-1, 1:-1] for a in omega_t))
    assert np.abs(dEdt - om @ E[1:-1, 1:-1]).max() <= 1e-3


def sphere_mesh(n):
    grid = GridSpec(0.0, 2.0, 0.6, 2.4, n, n)  # x = azimuth, t = polar angle
    xx, tt = grid.mesh()
    pts = np.stack([np.sin(tt) * np.cos(xx), np.sin(tt) * np.sin(xx), np.cos(tt)], -1)
    return SurfaceMesh(grid, pts)


def test_sphere_oracle():
    f = discrete_forms(sphere_mesh(101))
    assert f.n_degenerate == 0
    assert np.abs(f.K - 1).max() <= 0.01
    assert np.abs(np.abs(f.H) - 1).max() <= 0.01


def test_plane_is_flat():
    grid = GridSpec(0.0, 1.0, 0.0, 1.0, 11, 11)
    xx, tt = grid.mesh()
    mesh = SurfaceMesh(grid, np.stack([tt, xx, np.zeros_like(xx)], -1))
    f = discrete_forms(mesh)
    assert np.all(f.K == 0) and np.all(f.H == 0)


def test_small_mesh_rejected():
    grid = GridSpec(0.0, 1.0, 0.0, 1.0, 4, 6)
    with pytest.raises(ValueError):
        discrete_forms(SurfaceMesh(grid, np.zeros(grid.shape + (3,))))


def kink_forms(n):
    c, s = kink_scenario(n)
    mesh = reconstruct_surface(propagate_frames(c, s), c)
    I = first_fundamental_coeffs(c, s).I
    return discrete_forms(mesh), [f.values[1:-1, 1:-1] for f in I]


def test_kink_first_form_converges():
    errs = []
    for n in (101, 201):
        f, (E, F, G) = kink_forms(n)
        errs.append(max(np.abs(f.E - E).max(), np.abs(f.F - F).max(), np.abs(f.G - G).max()))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_kink_curvature_and_orientation():
    f, _ = kink_forms(201)
    ok = ~f.degenerate
    assert np.abs(f.K[ok] - 1).max() <= 0.02
    assert np.abs(f.H[ok] - 1).max() <= 0.02  # H = (h11 + h22) / 2 with e3 orientation


def test_exports(tmp_path):
    grid = GridSpec(0.0, 1.0, 0.0, 1.0, 3, 3)
    xx, tt = grid.mesh()
    mesh = SurfaceMesh(grid, np.stack([tt, xx, 0 * xx], -1))
    mesh.write_obj(tmp_path / "m.obj")
    mesh.write_csv(tmp_path / "m.csv")
    lines = (tmp_path / "m.obj").read_text().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 9
    faces = [list(map(int, line.split()[1:])) for line in lines if line.startswith("f ")]
    assert len(faces) == 8 and min(map(min, faces)) == 1 and max(map(max, faces)) == 9
    csv_lines = (tmp_path / "m.csv").read_text().splitlines()
    assert csv_lines[0] == "j,n,X,Y,Z" and csv_lines[2] == "1,0,0.0,0.5,0.0"
