"""Sine-Gordon reduction: phi_tt - phi_xx = -sin(phi).

The coefficient mapping is u12 = cos(phi/2), v13 = sin(phi/2),
u13 = v12 = 0, u23 = phi_x/2, v23 = phi_t/2 with h11 = h22 = 1, h = 0.
Exact kinks serve as oracles for the explicit three-level solver.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from laxlab.fields import (
    AUTO,
    CoefficientSet,
    GridSpec,
    ScalarField,
    SecondFormCoeffs,
    T,
    X,
    diff_t,
    diff_x,
)

log = logging.getLogger(__name__)

DEFAULT_CFL = 0.5
DEGENERACY_GUARD = 0.05


class CFLError(ValueError):
    pass


@dataclass(frozen=True)
class KinkParams:
    v: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        if not abs(self.v) < 1.0:
            raise ValueError(f"kink velocity must satisfy |v| < 1, got {self.v}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)


def kink(x, t, p: KinkParams):
    """4 atan(exp(gamma (x - v t - x0)))."""
    xi = p.gamma * (np.asarray(x, dtype=float) - p.v * np.asarray(t, dtype=float) - p.x0)
    return 4.0 * np.arctan(np.exp(xi))


def kink_t(x, t, p: KinkParams):
    """Time derivative of :func:`kink`."""
    xi = p.gamma * (np.asarray(x, dtype=float) - p.v * np.asarray(t, dtype=float) - p.x0)
    return -2.0 * p.gamma * p.v / np.cosh(xi)


def kink_expr(p: KinkParams):
    xi = (X - sp.Float(p.v) * T - sp.Float(p.x0)) * sp.Float(p.gamma)
    return 4 * sp.atan(sp.exp(xi))


def kink_field(grid: GridSpec, p: KinkParams) -> ScalarField:
    """Kink sampled on ``grid`` with its closed form attached."""
    xx, tt = grid.mesh()
    return ScalarField(grid, kink(xx, tt, p), kink_expr(p))


def kink_energy(p: KinkParams) -> float:
    return 8.0 * p.gamma


def coefficients_from_phi(phi: ScalarField, strategy: str = AUTO):
    """Map phi to the six form coefficients and h11 = h22 = 1, h = 0."""
    grid = phi.grid
    zero = ScalarField.constant(grid, 0.0)
    one = ScalarField.constant(grid, 1.0)
    c = CoefficientSet(
        u12=phi.map(lambda a: np.cos(a / 2), lambda e: sp.cos(e / 2)),
        u13=zero,
        u23=0.5 * diff_x(phi, strategy),
        v12=zero,
        v13=phi.map(lambda a: np.sin(a / 2), lambda e: sp.sin(e / 2)),
        v23=0.5 * diff_t(phi, strategy),
    )
    return c, SecondFormCoeffs(h11=one, h22=one, h=zero)


def kink_coefficients(grid: GridSpec, p: KinkParams):
    return coefficients_from_phi(kink_field(grid, p))


def degenerate_metric(phi: ScalarField, guard: float = DEGENERACY_GUARD) -> bool:
    """True (and logs a warning) where cos(phi/2) or sin(phi/2) nearly vanishes."""
    half = phi.values / 2
    low = min(np.abs(np.cos(half)).min(), np.abs(np.sin(half)).min())
    if low < guard:
        log.warning(
            "first fundamental form nearly degenerate: min(|cos(phi/2)|, |sin(phi/2)|) = %.3g",
            low,
        )
        return True
    return False


@dataclass
class SGState:
    """Initial data and Dirichlet traces for :func:`evolve`.

    Supply either ``phi1`` (the second time level) or ``phi_t0``; in the
    latter case the second level comes from a second-order Taylor start.
    ``left`` and ``right`` hold boundary values for every time level.
    """

    grid: GridSpec
    phi0: np.ndarray
    left: np.ndarray
    right: np.ndarray
    phi_t0: np.ndarray | None = None
    phi1: np.ndarray | None = None
    cfl: float = DEFAULT_CFL

    def __post_init__(self):
        g = self.grid
        ratio = g.dt / g.dx
        if ratio > self.cfl * (1 + 1e-12):
            raise CFLError(f"dt/dx = {ratio:.6g} exceeds the CFL bound {self.cfl}")
        if (self.phi_t0 is None) == (self.phi1 is None):
            raise ValueError("give exactly one of phi_t0 and phi1")
        self.phi0 = np.asarray(self.phi0, dtype=float)
        self.left = np.broadcast_to(np.asarray(self.left, dtype=float), (g.nt,))
        self.right = np.broadcast_to(np.asarray(self.right, dtype=float), (g.nt,))
        if self.phi0.shape != (g.nx,):
            raise ValueError("phi0 must have nx entries")

    @classmethod
    def from_kink(cls, grid: GridSpec, p: KinkParams, cfl: float = DEFAULT_CFL):
        x, t = grid.x, grid.t
        return cls(
            grid=grid,
            phi0=kink(x, grid.t_min, p),
            phi_t0=kink_t(x, grid.t_min, p),
            left=kink(grid.x_min, t, p),
            right=kink(grid.x_max, t, p),
            cfl=cfl,
        )

    @classmethod
    def zero(cls, grid: GridSpec, cfl: float = DEFAULT_CFL):
        z = np.zeros(grid.nx)
        return cls(grid=grid, phi0=z, phi_t0=z, left=0.0, right=0.0, cfl=cfl)


def _second_level(state: SGState) -> np.ndarray:
    if state.phi1 is not None:
        return np.asarray(state.phi1, dtype=float)
    g = state.grid
    p0 = state.phi0
    lap = np.zeros_like(p0)
    lap[1:-1] = (p0[2:] - 2 * p0[1:-1] + p0[:-2]) / g.dx**2
    p1 = p0 + g.dt * state.phi_t0 + 0.5 * g.dt**2 * (lap - np.sin(p0))
    p1[0], p1[-1] = state.left[1], state.right[1]
    return p1


def evolve(initial: SGState, n_steps: int | None = None) -> ScalarField:
    """Explicit leapfrog for phi_tt - phi_xx = -sin(phi).

    Returns phi on the first ``n_steps + 1`` time levels of the grid.
    """
    g = initial.grid
    if n_steps is None:
        n_steps = g.nt - 1
    if not 1 <= n_steps <= g.nt - 1:
        raise ValueError(f"n_steps must be in [1, {g.nt - 1}], got {n_steps}")
    r2 = (g.dt / g.dx) ** 2
    dt2 = g.dt**2
    out = np.empty((n_steps + 1, g.nx))
    out[0] = initial.phi0
    out[1] = _second_level(initial)
    for n in range(1, n_steps):
        prev, cur = out[n - 1], out[n]
        nxt = out[n + 1]
        nxt[1:-1] = (
            2 * cur[1:-1]
            - prev[1:-1]
            + r2 * (cur[2:] - 2 * cur[1:-1] + cur[:-2])
            - dt2 * np.sin(cur[1:-1])
        )
        nxt[0], nxt[-1] = initial.left[n + 1], initial.right[n + 1]
        if not np.all(np.isfinite(nxt)):
            bad = int(np.flatnonzero(~np.isfinite(nxt))[0])
            raise FloatingPointError(
                f"non-finite phi at step {n + 1} (t = {g.t[n + 1]:.6g}), node j = {bad}"
            )
    if n_steps == g.nt - 1:
        grid = g
    else:
        grid = GridSpec(g.x_min, g.x_max, g.t_min, g.t[n_steps], g.nx, n_steps + 1)
    return ScalarField(grid, out)


def energy(level, previous, grid: GridSpec) -> float:
    """Energy between two consecutive time levels.

    phi_t is the two-level difference; phi_x and the potential use the
    mean of the levels, so the estimate is centred at the half step.
    """
    level = np.asarray(level, dtype=float)
    previous = np.asarray(previous, dtype=float)
    phi_t = (level - previous) / grid.dt
    mid = 0.5 * (level + previous)
    phi_x = np.gradient(mid, grid.dx, edge_order=2)
    density = 0.5 * phi_t**2 + 0.5 * phi_x**2 + (1.0 - np.cos(mid))
    return float(np.trapezoid(density, dx=grid.dx))


def energy_series(phi: ScalarField):
    """``(t_half, E)`` for each pair of consecutive time levels."""
    v = phi.values
    g = phi.grid
    e = np.array([energy(v[n + 1], v[n], g) for n in range(g.nt - 1)])
    t = g.t
    return 0.5 * (t[1:] + t[:-1]), e


def write_phi_csv(path, phi: ScalarField):
    g = phi.grid
    x, t = g.x, g.t
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "t", "phi"))
        for n in range(g.nt):
            for j in range(g.nx):
                w.writerow((repr(float(x[j])), repr(float(t[n])), repr(float(phi.values[n, j]))))
