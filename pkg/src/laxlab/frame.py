"""Frame transport, surface reconstruction and discrete curvature.

The Darboux frame is stored with rows e1, e2, e3 and moves by
``dE = Omega E`` with

    Omega_t = skew(u23, h11 u12 + h u13, h u12 + h22 u13)
    Omega_x = skew(v23, h11 v12 + h v13, h v12 + h22 v13)

Each step multiplies by the exact exponential of the connection at the
step midpoint, so frames stay orthonormal to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from laxlab.algebra import is_rotation, orthonormality_defect, rodrigues_exp
from laxlab.fields import CoefficientSet, GridSpec, SecondFormCoeffs, check_same_grid
from laxlab.structure import build_forms

DEGENERATE_AREA = 1e-8


class DegenerateMeshError(ValueError):
    pass


def connection_triples(c: CoefficientSet, s: SecondFormCoeffs):
    """Slot arrays (12, 13, 23) of Omega_t and Omega_x at every node."""
    f = build_forms(c, s)
    omega_t = (c.u23.values, f.omega13.dt.values, f.omega23.dt.values)
    omega_x = (c.v23.values, f.omega13.dx.values, f.omega23.dx.values)
    return omega_t, omega_x


def _midpoint(a, axis):
    a = np.moveaxis(a, axis, 0)
    return np.moveaxis(0.5 * (a[1:] + a[:-1]), 0, axis)


def _step_rotations(triple, h, axis):
    """exp(h * Omega_mid) for every step along ``axis``."""
    return rodrigues_exp(tuple(h * _midpoint(a, axis) for a in triple))


def _chain(start, steps):
    """Frames along a path: ``out[k+1] = steps[k] @ out[k]``.

    ``steps`` has the path index first; trailing batch axes are shared
    with ``start``.
    """
    out = np.empty((steps.shape[0] + 1,) + start.shape)
    out[0] = start
    for k in range(steps.shape[0]):
        out[k + 1] = steps[k] @ out[k]
    return out


def _check_seed(seed):
    if seed is None:
        return np.eye(3)
    seed = np.asarray(seed, dtype=float)
    if not is_rotation(seed):
        raise ValueError("seed frame must be a rotation (orthonormal, det 1)")
    return seed


@dataclass(frozen=True)
class FrameField:
    grid: GridSpec
    frames: np.ndarray  # (nt, nx, 3, 3), rows e1, e2, e3

    def __post_init__(self):
        if self.frames.shape != self.grid.shape + (3, 3):
            raise ValueError("frame array does not match the grid")

    def defect(self) -> float:
        return float(np.max(orthonormality_defect(self.frames)))

    def determinant_error(self) -> float:
        return float(np.max(np.abs(np.linalg.det(self.frames) - 1.0)))


def propagate_frames(c: CoefficientSet, s: SecondFormCoeffs, seed=None) -> FrameField:
    """Transport ``seed`` from (x_min, t_min): along t at x_min, then along x."""
    grid = check_same_grid(c, s)
    seed = _check_seed(seed)
    omega_t, omega_x = connection_triples(c, s)
    col = tuple(a[:, 0] for a in omega_t)
    first = _chain(seed, _step_rotations(col, grid.dt, 0))  # (nt, 3, 3)
    steps_x = _step_rotations(omega_x, grid.dx, 1)  # (nt, nx-1, 3, 3)
    frames = _chain(first, np.moveaxis(steps_x, 1, 0))  # (nx, nt, 3, 3)
    return FrameField(grid, np.ascontiguousarray(np.moveaxis(frames, 0, 1)))


def path_defect(c: CoefficientSet, s: SecondFormCoeffs, seed=None) -> float:
    """Frobenius gap between frames transported to (x_max, t_max) two ways.

    Path A goes along t at x_min, then along x at t_max; path B goes
    along x at t_min, then along t at x_max.
    """
    grid = check_same_grid(c, s)
    seed = _check_seed(seed)
    omega_t, omega_x = connection_triples(c, s)

    def along_t(j, start):
        return _chain(start, _step_rotations(tuple(a[:, j] for a in omega_t), grid.dt, 0))[-1]

    def along_x(n, start):
        return _chain(start, _step_rotations(tuple(a[n, :] for a in omega_x), grid.dx, 0))[-1]

    a = along_x(-1, along_t(0, seed))
    b = along_t(-1, along_x(0, seed))
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class SurfaceMesh:
    grid: GridSpec
    points: np.ndarray  # (nt, nx, 3)
    normals: np.ndarray | None = None

    def __post_init__(self):
        if self.points.shape != self.grid.shape + (3,):
            raise ValueError("point array does not match the grid")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("mesh positions must be finite")

    def triangles(self) -> np.ndarray:
        """Zero-based vertex indices, two triangles per grid quad."""
        nt, nx = self.grid.shape
        idx = np.arange(nt * nx).reshape(nt, nx)
        a, b = idx[:-1, :-1], idx[:-1, 1:]
        c, d = idx[1:, :-1], idx[1:, 1:]
        tri = np.concatenate(
            [np.stack([a, b, d], -1).reshape(-1, 3), np.stack([a, d, c], -1).reshape(-1, 3)]
        )
        return tri

    def write_obj(self, path):
        pts = self.points.reshape(-1, 3)
        with open(path, "w") as fh:
            for p in pts:
                fh.write("v {} {} {}\n".format(*(repr(float(v)) for v in p)))
            for tri in self.triangles() + 1:
                fh.write("f {} {} {}\n".format(*tri))

    def write_csv(self, path):
        nt, nx = self.grid.shape
        with open(path, "w") as fh:
            fh.write("j,n,X,Y,Z\n")
            for n in range(nt):
                for j in range(nx):
                    X, Y, Z = (repr(float(v)) for v in self.points[n, j])
                    fh.write(f"{j},{n},{X},{Y},{Z}\n")


def reconstruct_surface(frames: FrameField, c: CoefficientSet) -> SurfaceMesh:
    """Integrate dx = omega_1 e1 + omega_2 e2 with the frame sweep order.

    Each segment uses the trapezoid rule on node values, anchored at the
    origin at (x_min, t_min).
    """
    grid = frames.grid
    if c.grid != grid:
        raise ValueError("frames and coefficients use different grids")
    E = frames.frames
    e1, e2 = E[..., 0, :], E[..., 1, :]
    x_t = c.u12.values[..., None] * e1 + c.u13.values[..., None] * e2
    x_x = c.v12.values[..., None] * e1 + c.v13.values[..., None] * e2
    pts = np.zeros(grid.shape + (3,))
    pts[1:, 0] = np.cumsum(grid.dt * _midpoint(x_t[:, 0], 0), axis=0)
    pts[:, 1:] = pts[:, :1] + np.cumsum(grid.dx * _midpoint(x_x, 1), axis=1)
    return SurfaceMesh(grid, pts, normals=E[..., 2, :].copy())


@dataclass(frozen=True)
class DiscreteForms:
    """Fundamental-form coefficients and curvatures at interior nodes.

    Arrays have shape ``(nt - 2, nx - 2)``; K and H are NaN where the node
    is flagged degenerate.
    """

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    K: np.ndarray
    H: np.ndarray
    degenerate: np.ndarray

    @property
    def n_degenerate(self) -> int:
        return int(self.degenerate.sum())


def discrete_forms(mesh: SurfaceMesh) -> DiscreteForms:
    """Central-difference fundamental forms of a grid surface (t first, x second).

    The unit normal is the normalized ``x_t x x_x``, flipped to agree with
    ``mesh.normals`` when the mesh carries them.
    """
    grid = mesh.grid
    if grid.nx < 5 or grid.nt < 5:
        raise ValueError("discrete_forms needs at least 5 nodes per axis")
    X = mesh.points
    dt, dx = grid.dt, grid.dx
    c = X[1:-1, 1:-1]
    x_t = (X[2:, 1:-1] - X[:-2, 1:-1]) / (2 * dt)
    x_x = (X[1:-1, 2:] - X[1:-1, :-2]) / (2 * dx)
    x_tt = (X[2:, 1:-1] - 2 * c + X[:-2, 1:-1]) / dt**2
    x_xx = (X[1:-1, 2:] - 2 * c + X[1:-1, :-2]) / dx**2
    x_tx = (X[2:, 2:] - X[2:, :-2] - X[:-2, 2:] + X[:-2, :-2]) / (4 * dt * dx)

    E = np.sum(x_t * x_t, -1)
    F = np.sum(x_t * x_x, -1)
    G = np.sum(x_x * x_x, -1)
    area = E * G - F * F
    degenerate = area < DEGENERATE_AREA
    if degenerate.all():
        raise DegenerateMeshError("every interior node has a degenerate first fundamental form")
    cross = np.cross(x_t, x_x)
    norm = np.linalg.norm(cross, axis=-1)
    normal = cross / np.where(norm > 0, norm, 1.0)[..., None]
    if mesh.normals is not None:
        # orient along the transported e3 so H keeps the frame's sign
        side = np.sum(normal * mesh.normals[1:-1, 1:-1], -1)
        normal = np.where(side[..., None] < 0, -normal, normal)
    L = np.sum(x_tt * normal, -1)
    M = np.sum(x_tx * normal, -1)
    N = np.sum(x_xx * normal, -1)
    safe = np.where(degenerate, 1.0, area)
    K = np.where(degenerate, np.nan, (L * N - M * M) / safe)
    H = np.where(degenerate, np.nan, (E * N - 2 * F * M + G * L) / (2 * safe))
    return DiscreteForms(E, F, G, L, M, N, K, H, degenerate)
