"""Command-line front end.

    orlicz-regularity <task> --config <path> [--out DIR] [--h REAL]
                      [--scales N] [--seed N]

Tasks: check-phi, solve, capacity, potential, wiener, perron.  Exit codes:
0 success, 2 configuration errors, 3 solver non-convergence.  Reports are
written atomically with a sha-256 manifest; one task per process.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .capacity import relative_capacity
from .config import Scenario, load_config
from .domain import Rect
from .errors import ConfigError, OrliczError
from .kernels import BACKEND
from .mesh import BOUNDARY, build_mesh
from .perron import resolutivity_gap
from .phi import check_conditions, estimate_sc_constants
from .potential import g_potential
from .reporting import dumps_json, emit_report, field_csv, measure_csv, plot_text, rows_to_csv
from .solver import solve_dirichlet
from .wiener import wiener_integral

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


def _base_report(sc: Scenario):
    return {"config": sc.resolved_config(), "backend": BACKEND}


def _phi_for(sc: Scenario):
    if sc.domain is not None:
        return sc.phi.with_bbox(sc.domain.bounding_box)
    return sc.phi


def _mesh_for(sc: Scenario):
    return build_mesh(sc.domain, sc.h)


def _K_mask(sc: Scenario, mesh):
    sdf = sc.K_region.sdf(mesh.nodes)
    return (sdf <= mesh.h / 2) & mesh.active_mask & (mesh.node_class != BOUNDARY)


def _task_check_phi(sc: Scenario):
    box = sc.domain.bounding_box if sc.domain is not None else Rect(-1, -1, 1, 1)
    phi = sc.phi.with_bbox(box)
    g0, gsup = estimate_sc_constants(phi, box)
    report = check_conditions(phi, box, sc.radii, threshold=sc.threshold)
    doc = _base_report(sc)
    doc["sc_constants"] = {"g0": g0, "g_sup": gsup}
    doc["conditions"] = report.to_json_dict()
    rows = [("condition", "radius", "window_lo", "window_hi", "sup_ratio", "threshold", "verdict")]
    for r in report.rows:
        rows.append((r.condition, r.radius, r.window[0], r.window[1],
                     r.sup_ratio, r.threshold, r.verdict))
    artifacts = {
        "check-phi.json": dumps_json(doc),
        "check-phi.csv": rows_to_csv(rows),
    }
    return artifacts, EXIT_OK


def _task_solve(sc: Scenario):
    mesh = _mesh_for(sc)
    phi = _phi_for(sc)
    data = mesh.interpolate(sc.boundary)
    result = solve_dirichlet(mesh, phi, data, sc.solve_options())
    doc = _base_report(sc)
    doc["result"] = result.to_json_dict()
    artifacts = {
        "solve.json": dumps_json(doc),
        "solution.csv": field_csv(mesh, result.field),
    }
    return artifacts, EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _task_capacity(sc: Scenario):
    mesh = _mesh_for(sc)
    phi = _phi_for(sc)
    result = relative_capacity(mesh, phi, _K_mask(sc, mesh), sc.solve_options())
    result.K_spec = sc.K_spec
    doc = _base_report(sc)
    doc["result"] = result.to_json_dict()
    artifacts = {
        "capacity.json": dumps_json(doc),
        "minimizer.csv": field_csv(mesh, result.minimizer),
    }
    return artifacts, EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _task_potential(sc: Scenario):
    mesh = _mesh_for(sc)
    phi = _phi_for(sc)
    result = g_potential(mesh, phi, _K_mask(sc, mesh), sc.solve_options())
    doc = _base_report(sc)
    doc["result"] = result.to_json_dict()
    artifacts = {
        "potential.json": dumps_json(doc),
        "potential.csv": field_csv(mesh, result.field),
        "measure.csv": measure_csv(result.measure.weights),
    }
    return artifacts, EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def _task_wiener(sc: Scenario):
    phi = _phi_for(sc)
    x0 = sc.x0 if sc.x0 is not None else sc.domain.marked_point
    report = wiener_integral(
        phi, sc.domain, x0, sc.rho, j_max=sc.scales,
        nodes_per_radius=sc.nodes_per_radius, opts=sc.solve_options(),
        slope_threshold=sc.slope_threshold,
    )
    doc = _base_report(sc)
    doc["report"] = report.to_json_dict()
    artifacts = {
        "wiener.json": dumps_json(doc),
        "wiener.csv": rows_to_csv(report.csv_rows()),
        "wiener.plot": plot_text(report.plot_rows()),
    }
    return artifacts, EXIT_OK


def _task_perron(sc: Scenario):
    mesh = _mesh_for(sc)
    phi = _phi_for(sc)
    data = mesh.interpolate(sc.boundary)
    result = resolutivity_gap(mesh, phi, data, sc.solve_options())
    doc = _base_report(sc)
    doc["result"] = result.to_json_dict()
    artifacts = {
        "perron.json": dumps_json(doc),
        "upper.csv": field_csv(mesh, result.upper),
        "lower.csv": field_csv(mesh, result.lower),
    }
    return artifacts, EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


_TASKS = {
    "check-phi": _task_check_phi,
    "solve": _task_solve,
    "capacity": _task_capacity,
    "potential": _task_potential,
    "wiener": _task_wiener,
    "perron": _task_perron,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="orlicz-regularity",
        description="Generalized Orlicz growth: solvers, capacities and regularity tests",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in _TASKS:
        p = sub.add_parser(task)
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--h", default=None, help="mesh step override (e.g. 1/64)")
        p.add_argument("--scales", type=int, default=None, help="dyadic scale count override")
        p.add_argument("--seed", type=int, default=None, help="sampling seed override")
    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        sc = load_config(args.config)
        if sc.task != args.task:
            raise ConfigError(
                f"config is for task {sc.task!r} but {args.task!r} was requested"
            )
        if args.out is not None:
            sc.out = args.out
        if args.h is not None:
            from ._specparse import parse_value

            sc.h = float(parse_value(args.h))
        if args.scales is not None:
            sc.scales = args.scales
        if args.seed is not None:
            sc.seed = args.seed
        artifacts, code = _TASKS[sc.task](sc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OrliczError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    emit_report(sc.out, artifacts)
    return code


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
