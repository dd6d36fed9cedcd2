"""Space-time grids, sampled scalar fields and their derivatives.

A :class:`ScalarField` holds samples on a :class:`GridSpec` with shape
``(nt, nx)`` (row = t index, column = x index).  A field may also carry a
closed form as a sympy expression in the symbols :data:`X` and :data:`T`;
arithmetic on fields keeps the closed form when every operand has one,
and differentiation then uses the exact derivative instead of a stencil.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import sympy as sp

X, T = sp.symbols("x t", real=True)

COEFF_NAMES = ("u12", "u13", "u23", "v12", "v13", "v23")
SECOND_FORM_NAMES = ("h11", "h22", "h")
CSV_HEADER = ("j", "n") + COEFF_NAMES + SECOND_FORM_NAMES

AUTO = "auto"
CLOSED_FORM = "closed_form"
FINITE_DIFFERENCE = "finite_difference"
MIXED = "mixed"
STRATEGIES = (AUTO, CLOSED_FORM, FINITE_DIFFERENCE)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    t_min: float
    t_max: float
    nx: int
    nt: int

    def __post_init__(self):
        for name in ("nx", "nt"):
            n = getattr(self, name)
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
                raise ValueError(f"{name} must be an integer, got {n!r}")
            if n < 3:
                raise ValueError(f"{name} must be >= 3, got {n}")
        for name in ("x_min", "x_max", "t_min", "t_max"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if not self.t_max > self.t_min:
            raise ValueError("t_max must exceed t_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.nt - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nt, self.nx)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.nt)

    def mesh(self):
        """``(xx, tt)`` coordinate arrays of shape ``(nt, nx)``."""
        return np.meshgrid(self.x, self.t, indexing="xy")

    def transposed(self) -> GridSpec:
        """Grid with the roles of x and t exchanged."""
        return GridSpec(self.t_min, self.t_max, self.x_min, self.x_max, self.nt, self.nx)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "nx": self.nx,
            "nt": self.nt,
        }


@functools.lru_cache(maxsize=512)
def _compiled(expr):
    return sp.lambdify((X, T), expr, modules="numpy")


def evaluate(expr, grid: GridSpec) -> np.ndarray:
    xx, tt = grid.mesh()
    with np.errstate(over="ignore"):
        vals = _compiled(expr)(xx, tt)
    return np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy()


class ScalarField:
    """Samples of a function of ``(x, t)`` on a grid, with optional closed form."""

    __slots__ = ("grid", "values", "expr")

    def __init__(self, grid: GridSpec, values, expr=None):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            values = np.broadcast_to(values, grid.shape).copy()
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.expr = expr

    @classmethod
    def from_expr(cls, grid: GridSpec, expr) -> ScalarField:
        expr = sp.sympify(expr)
        return cls(grid, evaluate(expr, grid), expr)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> ScalarField:
        return cls(grid, np.full(grid.shape, float(value)), sp.Float(value))

    @property
    def has_closed_form(self) -> bool:
        return self.expr is not None

    def _combine(self, other, op):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            expr = None
            if self.expr is not None and other.expr is not None:
                expr = op(self.expr, other.expr)
            return ScalarField(self.grid, op(self.values, other.values), expr)
        other = float(other)
        expr = None if self.expr is None else op(self.expr, sp.Float(other))
        return ScalarField(self.grid, op(self.values, other), expr)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._combine(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._combine(other, lambda a, b: b * a)

    def __neg__(self):
        return ScalarField(self.grid, -self.values, None if self.expr is None else -self.expr)

    def map(self, np_fn, sym_fn) -> ScalarField:
        """Apply a pointwise function given in both numpy and sympy form."""
        expr = None if self.expr is None else sym_fn(self.expr)
        return ScalarField(self.grid, np_fn(self.values), expr)

    def drop_closed_form(self) -> ScalarField:
        return ScalarField(self.grid, self.values)

    def transposed(self) -> ScalarField:
        """Same function with x and t exchanged."""
        expr = None
        if self.expr is not None:
            expr = self.expr.xreplace({X: T, T: X})
        return ScalarField(self.grid.transposed(), self.values.T, expr)

    def __repr__(self):
        kind = "closed-form" if self.expr is not None else "sampled"
        return f"ScalarField({kind}, shape={self.grid.shape})"


def _use_closed_form(f: ScalarField, strategy: str) -> bool:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown derivative strategy {strategy!r}")
    if strategy == CLOSED_FORM and f.expr is None:
        raise ValueError("closed-form derivative requested for a sampled field")
    return strategy != FINITE_DIFFERENCE and f.expr is not None


def diff_x(f: ScalarField, strategy: str = AUTO) -> ScalarField:
    """∂/∂x: exact if a closed form is available, otherwise second-order stencils."""
    if _use_closed_form(f, strategy):
        return ScalarField.from_expr(f.grid, sp.diff(f.expr, X))
    return ScalarField(f.grid, np.gradient(f.values, f.grid.dx, axis=1, edge_order=2))


def diff_t(f: ScalarField, strategy: str = AUTO) -> ScalarField:
    """∂/∂t, counterpart of :func:`diff_x`."""
    if _use_closed_form(f, strategy):
        return ScalarField.from_expr(f.grid, sp.diff(f.expr, T))
    return ScalarField(f.grid, np.gradient(f.values, f.grid.dt, axis=0, edge_order=2))


def strategy_used(fields, strategy: str = AUTO) -> str:
    """Tag describing how derivatives of ``fields`` are taken under ``strategy``."""
    flags = {_use_closed_form(f, strategy) for f in fields}
    if flags == {True}:
        return CLOSED_FORM
    if flags == {False}:
        return FINITE_DIFFERENCE
    return MIXED


@dataclass(frozen=True)
class CoefficientSet:
    """dt- and dx-coefficients of the forms omega_1, omega_2, omega_12."""

    u12: ScalarField
    u13: ScalarField
    u23: ScalarField
    v12: ScalarField
    v13: ScalarField
    v23: ScalarField

    def __post_init__(self):
        _check_shared_grid(self.fields())

    @property
    def grid(self) -> GridSpec:
        return self.u12.grid

    def fields(self):
        return [getattr(self, n) for n in COEFF_NAMES]

    def replace(self, **kw) -> CoefficientSet:
        d = {n: getattr(self, n) for n in COEFF_NAMES}
        d.update(kw)
        return CoefficientSet(**d)

    def transposed(self) -> CoefficientSet:
        """Exchange x and t: u and v swap roles."""
        return CoefficientSet(
            u12=self.v12.transposed(),
            u13=self.v13.transposed(),
            u23=self.v23.transposed(),
            v12=self.u12.transposed(),
            v13=self.u13.transposed(),
            v23=self.u23.transposed(),
        )


@dataclass(frozen=True)
class SecondFormCoeffs:
    """Entries h11, h22 and h = h12 = h21 of the second fundamental form."""

    h11: ScalarField
    h22: ScalarField
    h: ScalarField

    def __post_init__(self):
        _check_shared_grid(self.fields())

    @property
    def grid(self) -> GridSpec:
        return self.h11.grid

    def fields(self):
        return [self.h11, self.h22, self.h]

    def transposed(self) -> SecondFormCoeffs:
        return SecondFormCoeffs(*(f.transposed() for f in self.fields()))


def _check_shared_grid(fields):
    grid = fields[0].grid
    if any(f.grid != grid for f in fields[1:]):
        raise ValueError("all fields must share one grid")


def check_same_grid(c: CoefficientSet, s: SecondFormCoeffs) -> GridSpec:
    if c.grid != s.grid:
        raise ValueError("coefficient set and second-form coefficients use different grids")
    return c.grid


FAMILIES = ("zero", "constant", "sine_gordon_kink", "custom_csv")


def sample_family(family: dict, grid: GridSpec):
    """Instantiate a named coefficient family on ``grid``.

    ``family`` is a mapping with a ``name`` key plus family parameters:

    * ``zero``: no parameters.
    * ``constant``: any of the nine coefficient names (default 0).
    * ``sine_gordon_kink``: ``v`` (velocity) and ``x0`` (centre).
    * ``custom_csv``: ``path`` to a nine-column CSV file.

    Returns ``(CoefficientSet, SecondFormCoeffs)``.
    """
    params = dict(family)
    name = params.pop("name", None)
    if name == "zero":
        _no_extra(name, params, ())
        return _constants(grid, {})
    if name == "constant":
        _no_extra(name, params, COEFF_NAMES + SECOND_FORM_NAMES)
        return _constants(grid, params)
    if name == "sine_gordon_kink":
        from laxlab.sine_gordon import KinkParams, kink_coefficients

        _no_extra(name, params, ("v", "x0"))
        return kink_coefficients(grid, KinkParams(**params))
    if name == "custom_csv":
        _no_extra(name, params, ("path",))
        return read_coefficients_csv(params["path"], grid)
    raise ValueError(f"unknown coefficient family {name!r}")


def _no_extra(name, params, allowed):
    extra = sorted(set(params) - set(allowed))
    if extra:
        raise ValueError(f"unknown parameter {extra[0]!r} for family {name!r}")


def _constants(grid, values):
    f = {n: ScalarField.constant(grid, float(values.get(n, 0.0))) for n in CSV_HEADER[2:]}
    c = CoefficientSet(**{n: f[n] for n in COEFF_NAMES})
    s = SecondFormCoeffs(**{n: f[n] for n in SECOND_FORM_NAMES})
    return c, s


def read_coefficients_csv(path, grid: GridSpec):
    """Load nine sampled fields from a ``j,n,u12,...,h`` CSV file."""
    data = {n: np.full(grid.shape, np.nan) for n in CSV_HEADER[2:]}
    seen = np.zeros(grid.shape, dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
        for row in reader:
            j, n = int(row["j"]), int(row["n"])
            if not (0 <= j < grid.nx and 0 <= n < grid.nt):
                raise ValueError(f"CSV node (j={j}, n={n}) outside the {grid.nx}x{grid.nt} grid")
            if seen[n, j]:
                raise ValueError(f"CSV node (j={j}, n={n}) appears twice")
            seen[n, j] = True
            for name in CSV_HEADER[2:]:
                data[name][n, j] = float(row[name])
    if not seen.all():
        raise ValueError(f"CSV covers {seen.sum()} of {seen.size} grid nodes")
    f = {n: ScalarField(grid, v) for n, v in data.items()}
    c = CoefficientSet(**{n: f[n] for n in COEFF_NAMES})
    s = SecondFormCoeffs(**{n: f[n] for n in SECOND_FORM_NAMES})
    return c, s


def write_coefficients_csv(path, c: CoefficientSet, s: SecondFormCoeffs):
    grid = check_same_grid(c, s)
    cols = [f.values for f in c.fields() + s.fields()]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for n in range(grid.nt):
            for j in range(grid.nx):
                w.writerow([j, n] + [repr(float(col[n, j])) for col in cols])
