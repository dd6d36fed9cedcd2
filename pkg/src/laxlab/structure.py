"""Connection forms, structure-equation residuals, curvatures and fundamental forms.

The surface one-forms are

    omega_1  = u12 dt + v12 dx
    omega_2  = u13 dt + v13 dx
    omega_12 = u23 dt + v23 dx

and omega_13, omega_23 follow from omega_1, omega_2 through the
symmetric second-form coefficients (h11, h, h22).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from laxlab.fields import (
    AUTO,
    CoefficientSet,
    GridSpec,
    ScalarField,
    SecondFormCoeffs,
    check_same_grid,
    diff_t,
    diff_x,
    strategy_used,
)

STRUCTURE_LABELS = ("eq1", "eq2", "eq3", "eq4", "eq5")


@dataclass(frozen=True)
class Form:
    """A one-form ``dt_coeff dt + dx_coeff dx``."""

    dt: ScalarField
    dx: ScalarField


@dataclass(frozen=True)
class FormBundle:
    omega1: Form
    omega2: Form
    omega12: Form
    omega13: Form
    omega23: Form

    @property
    def grid(self) -> GridSpec:
        return self.omega1.dt.grid


def build_forms(c: CoefficientSet, s: SecondFormCoeffs) -> FormBundle:
    check_same_grid(c, s)
    return FormBundle(
        omega1=Form(c.u12, c.v12),
        omega2=Form(c.u13, c.v13),
        omega12=Form(c.u23, c.v23),
        omega13=Form(s.h11 * c.u12 + s.h * c.u13, s.h11 * c.v12 + s.h * c.v13),
        omega23=Form(s.h * c.u12 + s.h22 * c.u13, s.h * c.v12 + s.h22 * c.v13),
    )


@dataclass
class ResidualReport:
    """Per-equation residual norms over a grid.

    ``fields`` keeps the pointwise residual arrays; it is not serialized.
    """

    labels: tuple
    max_abs: dict
    rms_interior: dict
    grid: GridSpec
    strategy: str
    fields: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_fields(cls, residuals: dict, grid: GridSpec, strategy: str):
        max_abs, rms = {}, {}
        for label, r in residuals.items():
            r = np.asarray(r, dtype=float)
            if not np.all(np.isfinite(r)):
                raise FloatingPointError(f"non-finite residual in {label}")
            max_abs[label] = float(np.abs(r).max())
            inner = r[1:-1, 1:-1]
            rms[label] = float(np.sqrt(np.mean(inner * inner)))
        return cls(tuple(residuals), max_abs, rms, grid, strategy, dict(residuals))

    def worst(self) -> float:
        return max(self.max_abs.values())

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "derivatives": self.strategy,
            "residuals": [
                {
                    "equation": label,
                    "max_abs": self.max_abs[label],
                    "rms_interior": self.rms_interior[label],
                }
                for label in self.labels
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def residuals_structure(
    c: CoefficientSet, s: SecondFormCoeffs, strategy: str = AUTO
) -> ResidualReport:
    """Residuals of the five structure equations, term by term as printed."""
    grid = check_same_grid(c, s)
    f = build_forms(c, s)
    u12, u13, u23 = c.u12.values, c.u13.values, c.u23.values
    v12, v13, v23 = c.v12.values, c.v13.values, c.v23.values
    h11, h22, h = s.h11.values, s.h22.values, s.h.values

    def dx(g):
        return diff_x(g, strategy).values

    def dt(g):
        return diff_t(g, strategy).values

    res = {
        "eq1": dx(c.u12) - dt(c.v12) + u23 * v13 - u13 * v23,
        "eq2": dx(c.u13) - dt(c.v13) + u12 * v23 - u23 * v12,
        "eq3": dx(c.u23) - dt(c.v23) + (h11 * h22 - h**2) * (u13 * v12 - u12 * v13),
        "eq4": dx(f.omega13.dt)
        - dt(f.omega13.dx)
        + u23 * (h * v12 + h22 * v13)
        - v23 * (h * u12 + h22 * u13),
        "eq5": dx(f.omega23.dt)
        - dt(f.omega23.dx)
        + v23 * (h11 * u12 + h * u13)
        - u23 * (h11 * v12 + h * v13),
    }
    differentiated = c.fields() + [f.omega13.dt, f.omega13.dx, f.omega23.dt, f.omega23.dx]
    return ResidualReport.from_fields(res, grid, strategy_used(differentiated, strategy))


@dataclass(frozen=True)
class CurvatureFields:
    H: ScalarField
    K: ScalarField


def curvatures(s: SecondFormCoeffs) -> CurvatureFields:
    return CurvatureFields(
        H=0.5 * (s.h11 + s.h22),
        K=s.h11 * s.h22 - s.h * s.h,
    )


@dataclass(frozen=True)
class FundamentalForms:
    """dt^2, dt dx and dx^2 coefficients of I, II and III.

    A quadratic form ``a dt^2 + 2 b dt dx + c dx^2`` is stored as
    ``(a, b, c)``.
    """

    I: tuple
    II: tuple
    III: tuple


def _product(p: Form, q: Form):
    # symmetric product of two one-forms
    return (p.dt * q.dt, 0.5 * (p.dt * q.dx + p.dx * q.dt), p.dx * q.dx)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def first_fundamental_coeffs(c: CoefficientSet, s: SecondFormCoeffs) -> FundamentalForms:
    """Coefficients of I = w1^2 + w2^2, II = w1 w13 + w2 w23, III = w13^2 + w23^2."""
    f = build_forms(c, s)
    return FundamentalForms(
        I=_add(_product(f.omega1, f.omega1), _product(f.omega2, f.omega2)),
        II=_add(_product(f.omega1, f.omega13), _product(f.omega2, f.omega23)),
        III=_add(_product(f.omega13, f.omega13), _product(f.omega23, f.omega23)),
    )
