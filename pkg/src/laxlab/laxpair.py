"""Block SO(6) Lax pair, zero-curvature residuals and the matching constraint.

U = U1 (+) U2 and V = V1 (+) V2 with

    U1 = skew(u12, u13, u23)
    U2 = skew(h11 u12 + h u13, h u12 + h22 u13, u23)

and V1, V2 built the same way from the v coefficients.  The residual
U_x - V_t + [U, V] has six independent slots; block-1 slot (2,3) and
block-2 slot (2,3) carry the two competing versions of the Gauss
equation and differ by

    (1 - (h11 h22 - h^2)) (u13 v12 - u12 v13).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from laxlab.algebra import block_diag, commutator, skew_from_triple
from laxlab.fields import (
    AUTO,
    CoefficientSet,
    ScalarField,
    SecondFormCoeffs,
    check_same_grid,
    diff_t,
    diff_x,
    strategy_used,
)
from laxlab.structure import ResidualReport, build_forms, residuals_structure

LAX_LABELS = ("block1_12", "block1_13", "block1_23", "block2_12", "block2_13", "block2_23")
SLOTS = ((0, 1), (0, 2), (1, 2))

# structure equation -> Lax slot reproducing it
PAIRING = {
    "eq1": "block1_12",
    "eq2": "block1_13",
    "eq3": "block2_23",
    "eq4": "block2_12",
    "eq5": "block2_13",
}

# Omega_t = skew(u23, w13_t, w23_t) maps to U2 under conjugation by P
P = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])

THRESHOLD_CLOSED_FORM = 1e-10
THRESHOLD_SAMPLED = 1e-6
U12_GUARD = 1e-6


def lax_entries(c: CoefficientSet, s: SecondFormCoeffs):
    """Slot fields ``(U1, V1, U2, V2)``, each a triple (12, 13, 23)."""
    f = build_forms(c, s)
    return (
        (c.u12, c.u13, c.u23),
        (c.v12, c.v13, c.v23),
        (f.omega13.dt, f.omega23.dt, c.u23),
        (f.omega13.dx, f.omega23.dx, c.v23),
    )


@dataclass(frozen=True)
class LaxPairAt:
    U: np.ndarray
    V: np.ndarray

    @property
    def blocks(self):
        return self.U[:3, :3], self.U[3:, 3:], self.V[:3, :3], self.V[3:, 3:]


def build_lax_at(c: CoefficientSet, s: SecondFormCoeffs, node) -> LaxPairAt:
    """U and V at grid node ``(j, n)`` (x index, t index)."""
    grid = check_same_grid(c, s)
    j, n = node
    if not (0 <= j < grid.nx and 0 <= n < grid.nt):
        raise IndexError(f"node {node} outside the {grid.nx}x{grid.nt} grid")
    u1, v1, u2, v2 = (
        skew_from_triple([f.values[n, j] for f in triple]) for triple in lax_entries(c, s)
    )
    return LaxPairAt(U=block_diag(u1, u2), V=block_diag(v1, v2))


def lax_matrices(c: CoefficientSet, s: SecondFormCoeffs):
    """Blocks U1, V1, U2, V2 at every node, shape ``(nt, nx, 3, 3)`` each."""
    return tuple(
        skew_from_triple([f.values for f in triple]) for triple in lax_entries(c, s)
    )


def zero_curvature_residuals(
    c: CoefficientSet, s: SecondFormCoeffs, strategy: str = AUTO
) -> ResidualReport:
    """Six independent slots of U_x - V_t + [U, V]."""
    grid = check_same_grid(c, s)
    u1, v1, u2, v2 = lax_entries(c, s)
    res = {}
    for block, (ut, vt) in enumerate(((u1, v1), (u2, v2)), start=1):
        U = skew_from_triple([f.values for f in ut])
        V = skew_from_triple([f.values for f in vt])
        Ux = skew_from_triple([diff_x(f, strategy).values for f in ut])
        Vt = skew_from_triple([diff_t(f, strategy).values for f in vt])
        Z = Ux - Vt + commutator(U, V)
        for (a, b), label in zip(SLOTS, ("12", "13", "23")):
            res[f"block{block}_{label}"] = Z[..., a, b]
    differentiated = list(u1) + list(v1) + list(u2) + list(v2)
    return ResidualReport.from_fields(res, grid, strategy_used(differentiated, strategy))


def coefficient_factor(c: CoefficientSet) -> ScalarField:
    return c.u12 * c.v13 - c.u13 * c.v12


def curvature_factor(s: SecondFormCoeffs) -> ScalarField:
    """h^2 - h11 h22 + 1, zero exactly when the total curvature is one."""
    return s.h * s.h - s.h11 * s.h22 + 1.0


def constraint_field(c: CoefficientSet, s: SecondFormCoeffs) -> ScalarField:
    check_same_grid(c, s)
    return coefficient_factor(c) * curvature_factor(s)


class Branch(str, enum.Enum):
    COEFFICIENT = "CoefficientBranch"
    CURVATURE_ONE = "CurvatureOneBranch"
    BOTH = "Both"
    NEITHER = "Neither"


@dataclass(frozen=True)
class BranchClass:
    branch: Branch
    coefficient_factor_max: float
    curvature_factor_max: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "coefficient_factor_max_abs": self.coefficient_factor_max,
            "curvature_factor_max_abs": self.curvature_factor_max,
            "threshold": self.threshold,
        }


def default_threshold(c: CoefficientSet, s: SecondFormCoeffs) -> float:
    closed = all(f.has_closed_form for f in c.fields() + s.fields())
    return THRESHOLD_CLOSED_FORM if closed else THRESHOLD_SAMPLED


def classify_branch(c: CoefficientSet, s: SecondFormCoeffs, threshold=None) -> BranchClass:
    """Which factor of the matching constraint vanishes (to ``threshold``)."""
    if threshold is None:
        threshold = default_threshold(c, s)
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    check_same_grid(c, s)
    a = float(np.abs(coefficient_factor(c).values).max())
    b = float(np.abs(curvature_factor(s).values).max())
    coeff_ok, curv_ok = a <= threshold, b <= threshold
    if coeff_ok and curv_ok:
        branch = Branch.BOTH
    elif coeff_ok:
        branch = Branch.COEFFICIENT
    elif curv_ok:
        branch = Branch.CURVATURE_ONE
    else:
        branch = Branch.NEITHER
    return BranchClass(branch, a, b, float(threshold))


def equivalence_report(
    c: CoefficientSet, s: SecondFormCoeffs, strategy: str = AUTO
) -> ResidualReport:
    """Pointwise discrepancies between the structure and Lax systems.

    Entries ``eqK-blockB_IJ`` compare each structure equation with the Lax
    slot that reproduces it; ``block1_23-block2_23`` compares the two
    versions of the Gauss equation and vanishes iff the constraint holds.
    """
    st = residuals_structure(c, s, strategy)
    lx = zero_curvature_residuals(c, s, strategy)
    diffs = {f"{eq}-{slot}": st.fields[eq] - lx.fields[slot] for eq, slot in PAIRING.items()}
    diffs["block1_23-block2_23"] = lx.fields["block1_23"] - lx.fields["block2_23"]
    return ResidualReport.from_fields(diffs, st.grid, lx.strategy)


def coefficient_branch_substitution(c: CoefficientSet, guard: float = U12_GUARD):
    """Impose u12 v13 = u13 v12 by setting v13 = u13 v12 / u12.

    Nodes with ``|u12| <= guard`` keep their original v13 and are marked
    invalid.  Returns ``(substituted set, valid mask, excluded count)``.
    """
    u12 = c.u12.values
    valid = np.abs(u12) > guard
    safe = np.where(valid, u12, 1.0)
    v13 = np.where(valid, c.u13.values * c.v12.values / safe, c.v13.values)
    expr = None
    if c.u12.expr is not None and c.u13.expr is not None and c.v12.expr is not None and valid.all():
        expr = c.u13.expr * c.v12.expr / c.u12.expr
    sub = c.replace(v13=ScalarField(c.grid, v13, expr))
    return sub, valid, int((~valid).sum())
