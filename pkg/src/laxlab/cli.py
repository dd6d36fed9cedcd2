"""``laxlab verify|solve|reconstruct|report --scenario FILE [--out DIR]``.

Exit codes: 0 = checked and passed, 1 = checked and failed,
2 = could not check (bad scenario, CFL violation, unsupported family).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from laxlab import frame, laxpair, sine_gordon, structure
from laxlab.fields import FINITE_DIFFERENCE, GridSpec, sample_family
from laxlab.scenario import KinkFamily, Scenario, ScenarioError, ZeroFamily, load_scenario

log = logging.getLogger("laxlab")

PASS, FAIL, INVALID = 0, 1, 2
ROUNDOFF_FLOOR = 1e-11


class UsageError(Exception):
    """Input that cannot be checked; maps to exit code 2."""


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _coefficients(sc: Scenario, grid: GridSpec):
    try:
        c, s = sample_family(sc.family.model_dump(), grid)
    except (ValueError, OSError) as exc:
        raise UsageError(f"family: {exc}") from None
    if sc.perturbation.u23_factor != 1.0:
        c = c.replace(u23=sc.perturbation.u23_factor * c.u23)
    return c, s


def _manifest(out: Path, command: str, sc: Scenario):
    _write_json(out / "run_manifest.json", {"command": command, "scenario": sc.model_dump(mode="json")})


def cmd_verify(sc: Scenario, out: Path) -> int:
    grid = sc.grid.spec()
    c, s = _coefficients(sc, grid)
    st = structure.residuals_structure(c, s, sc.derivatives)
    lx = laxpair.zero_curvature_residuals(c, s, sc.derivatives)
    eq = laxpair.equivalence_report(c, s, sc.derivatives)
    br = laxpair.classify_branch(c, s, sc.tolerances.branch_threshold)
    constraint = laxpair.constraint_field(c, s)

    _write_json(out / "structure_residuals.json", st.to_dict())
    _write_json(out / "lax_residuals.json", lx.to_dict())
    eq_doc = eq.to_dict()
    eq_doc["slot23_difference_max_abs"] = eq.max_abs["block1_23-block2_23"]
    eq_doc["constraint_max_abs"] = float(np.abs(constraint.values).max())
    _write_json(out / "equivalence.json", eq_doc)
    _write_json(out / "branch.json", br.to_dict())

    tol = sc.tolerances.residual
    worst = max(st.worst(), lx.worst())
    print(f"structure max residual {st.worst():.3e}, lax max residual {lx.worst():.3e} "
          f"(tolerance {tol:g}); branch {br.branch.value}")
    return PASS if worst <= tol else FAIL


def cmd_solve(sc: Scenario, out: Path) -> int:
    grid = sc.grid.spec()
    fam = sc.family
    try:
        if isinstance(fam, KinkFamily):
            params = sine_gordon.KinkParams(fam.v, fam.x0)
            state = sine_gordon.SGState.from_kink(grid, params, sc.solve.cfl)
        elif isinstance(fam, ZeroFamily):
            params = None
            state = sine_gordon.SGState.zero(grid, sc.solve.cfl)
        else:
            raise UsageError(f"family {fam.name!r} provides no sine-Gordon initial data")
    except sine_gordon.CFLError as exc:
        raise UsageError(str(exc)) from None
    try:
        phi = sine_gordon.evolve(state, sc.solve.n_steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except FloatingPointError as exc:
        print(f"laxlab: solver diverged: {exc}", file=sys.stderr)
        return FAIL

    sine_gordon.write_phi_csv(out / "phi.csv", phi)
    t_half, energies = sine_gordon.energy_series(phi)
    with open(out / "energy.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "energy"))
        for t, e in zip(t_half, energies):
            w.writerow((repr(float(t)), repr(float(e))))

    e0 = float(energies[0])
    drift = float(np.abs(energies - e0).max() / e0) if e0 > 0 else float(np.abs(energies).max())
    summary = {"grid": phi.grid.to_dict(), "steps": phi.grid.nt - 1, "energy_initial": e0,
               "energy_drift": drift, "max_error": None}
    status = PASS
    if params is not None:
        xx, tt = phi.grid.mesh()
        err = float(np.abs(phi.values - sine_gordon.kink(xx, tt, params)).max())
        summary["max_error"] = err
        summary["energy_exact"] = sine_gordon.kink_energy(params)
        tol = sc.tolerances.solution
        if tol is not None and err > tol:
            status = FAIL
        print(f"max error vs exact kink {err:.3e}; relative energy drift {drift:.3e}")
    else:
        print(f"max |phi| {float(np.abs(phi.values).max()):.3e}; energy {e0:.3e}")
    _write_json(out / "solve.json", summary)
    return status


def cmd_reconstruct(sc: Scenario, out: Path) -> int:
    grid = sc.grid.spec()
    c, s = _coefficients(sc, grid)
    warn = False
    if isinstance(sc.family, KinkFamily):
        phi = sine_gordon.kink_field(grid, sine_gordon.KinkParams(sc.family.v, sc.family.x0))
        warn = sine_gordon.degenerate_metric(phi, sc.tolerances.degeneracy_guard)
    try:
        frames = frame.propagate_frames(c, s, sc.reconstruct.seed)
    except ValueError as exc:
        raise UsageError(f"reconstruct.seed: {exc}") from None
    mesh = frame.reconstruct_surface(frames, c)
    mesh.write_obj(out / "surface.obj")
    mesh.write_csv(out / "surface.csv")

    report = {"grid": grid.to_dict(), "degeneracy_warning": warn,
              "frame_orthonormality_defect": frames.defect(),
              "n_interior": (grid.nt - 2) * (grid.nx - 2)}
    try:
        forms = frame.discrete_forms(mesh)
    except frame.DegenerateMeshError as exc:
        report.update(n_degenerate=report["n_interior"], K_disc_mean=None, H_disc_mean=None,
                      K_max_deviation=None)
        _write_json(out / "curvature.json", report)
        print(f"laxlab: {exc}", file=sys.stderr)
        return FAIL

    ok = ~forms.degenerate
    curv = structure.curvatures(s)
    k_exact = curv.K.values[1:-1, 1:-1][ok]
    h_exact = curv.H.values[1:-1, 1:-1][ok]
    k_disc = forms.K[ok]
    dev = float(np.abs(k_disc - k_exact).max())
    report.update(
        n_degenerate=forms.n_degenerate,
        K_disc_mean=float(k_disc.mean()),
        H_disc_mean=float(forms.H[ok].mean()),
        K_analytic_mean=float(k_exact.mean()),
        H_analytic_mean=float(h_exact.mean()),
        K_max_deviation=dev,
        H_max_deviation=float(np.abs(forms.H[ok] - h_exact).max()),
    )
    _write_json(out / "curvature.json", report)
    scale = max(1.0, float(np.abs(k_exact).max()))
    print(f"mean K_disc {report['K_disc_mean']:.6f}; max deviation {dev:.3e}; "
          f"{forms.n_degenerate} degenerate nodes")
    return PASS if dev <= sc.tolerances.curvature * scale else FAIL


def observed_orders(resolutions, table):
    """Orders between consecutive rows; ``None`` where a residual is at roundoff."""
    orders = []
    for (n0, r0), (n1, r1) in zip(zip(resolutions, table), zip(resolutions[1:], table[1:])):
        ratio = (n1 - 1) / (n0 - 1)
        row = {}
        for k in r0:
            if r0[k] <= ROUNDOFF_FLOOR or r1[k] <= ROUNDOFF_FLOOR:
                row[k] = None
            else:
                row[k] = math.log(r0[k] / r1[k]) / math.log(ratio)
        orders.append(row)
    return orders


def cmd_report(sc: Scenario, out: Path) -> int:
    res = sc.refinements
    if res is None or len(res) < 2:
        raise UsageError("refinements: at least two grid resolutions are required")
    if sc.family.name == "custom_csv":
        raise UsageError("family: custom_csv fields cannot be resampled on refined grids")
    strategy = FINITE_DIFFERENCE if sc.derivatives == "auto" else sc.derivatives
    g = sc.grid
    table = []
    for n in res:
        grid = GridSpec(g.x_min, g.x_max, g.t_min, g.t_max, n, n)
        c, s = _coefficients(sc, grid)
        table.append(laxpair.zero_curvature_residuals(c, s, strategy).max_abs)
    orders = [None] + observed_orders(res, table)

    labels = laxpair.LAX_LABELS
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["resolution", *labels, *(f"order_{k}" for k in labels)])
        for n, row, ords in zip(res, table, orders):
            cells = [repr(float(row[k])) for k in labels]
            cells += ["N/A" if ords is None or ords[k] is None else repr(ords[k]) for k in labels]
            w.writerow([n, *cells])

    lo, hi = sc.tolerances.order_window
    numeric = [o for row in orders[1:] for o in row.values() if o is not None]
    bad = [o for o in numeric if not lo <= o <= hi]
    print(f"{len(numeric)} observed orders, {len(bad)} outside [{lo}, {hi}]")
    return FAIL if bad else PASS


COMMANDS = {
    "verify": cmd_verify,
    "solve": cmd_solve,
    "reconstruct": cmd_reconstruct,
    "report": cmd_report,
}


def build_parser():
    p = argparse.ArgumentParser(prog="laxlab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", required=True, help="path to a JSON scenario file")
    p.add_argument("--out", help="output directory (overrides the scenario's output_dir)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="laxlab: %(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"laxlab: invalid scenario: {exc}", file=sys.stderr)
        return INVALID
    out = Path(args.out if args.out else sc.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _manifest(out, args.command, sc)
    try:
        return COMMANDS[args.command](sc, out)
    except UsageError as exc:
        print(f"laxlab: {exc}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
