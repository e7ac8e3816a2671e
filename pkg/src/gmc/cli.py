"""Command line entry point ``gmc``.

    gmc <solve|covolume|surface|check-gradient|exhaust|oracle> FILE
        [--seed N] [--grid N] [--out PATH] [--csv PATH]

Reports are canonical JSON (sorted keys) on stdout or in ``--out``; each
echoes the problem with command line overrides applied, so it re-runs as
is. Exit status: 0 success, 2 invalid input, 3 solver did not converge (the
report is still written). Errors go to stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .cone import build_grid, cone_gaussian_mass, lambda_bound
from .errors import GMCError, StageFailed, ValidationError
from .exhaustion import single_stage, solve_exhaustive
from .measures import covolume, mc_covolume_oracle, surface_measure_facet, surface_measure_pushforward
from .problem import ProblemError, dumps, load_problem, parse_problem
from .pseudo_cone import radial_over, wulff
from .solver import solve

COMMANDS = ("solve", "covolume", "surface", "check-gradient", "exhaust", "oracle")
FD_STEP = 1e-4
EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3


def _grid_info(grid):
    return {"nodes": len(grid), "resolution": list(grid.resolution), "scheme": grid.scheme, "seed": grid.seed}


def _apply_overrides(raw, args):
    raw = json.loads(json.dumps(raw))
    if args.grid is not None:
        raw.setdefault("grid", {})["resolution"] = args.grid
    if args.seed is not None:
        raw.setdefault("grid", {})["seed"] = args.seed
        raw.setdefault("oracle", {})["seed"] = args.seed
    return raw


def _support(problem, grid):
    """The file's support vector, or the solver's f* when none is given."""
    if problem.support is not None:
        return problem.support, None
    report = solve(problem.measure, problem.config, grid=grid)
    return report.support, report


def _write_profile(path, shape, grid):
    rho, idx = radial_over(shape, grid.nodes)
    coords = grid.coordinates()
    names = {2: ["angle"], 3: ["polar", "azimuth"]}.get(shape.cone.dim, ["polar"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["rho", "facet"])
        for c, r, j in zip(coords, rho, idx):
            w.writerow([repr(float(x)) for x in c] + [repr(float(r)), int(j)])


def cmd_solve(problem, grid, args):
    report = solve(problem.measure, problem.config, grid=grid)
    if args.csv:
        _write_profile(args.csv, wulff(problem.measure, report.support), grid)
    return {"result": report.to_dict()}, report.converged


def cmd_covolume(problem, grid, args):
    f, report = _support(problem, grid)
    cov = covolume(wulff(problem.measure, f), grid)
    beta = cone_gaussian_mass(problem.cone)
    out = {
        "beta": beta,
        "covolume": cov,
        "f": [float(x) for x in f],
        "feasible": bool(cov <= 0.5 * beta + 1e-8),
        "lambda_bound": lambda_bound(problem.cone),
        "level": 0.5 * beta,
    }
    return out, report is None or report.converged


def cmd_surface(problem, grid, args):
    f, report = _support(problem, grid)
    shape = wulff(problem.measure, f)
    push = surface_measure_pushforward(shape, grid)
    out = {"f": [float(x) for x in f], "pushforward": push.masses.tolist(), "pushforward_error": push.error}
    if problem.cone.dim == 2:
        facet = surface_measure_facet(shape)
        out["facet"] = facet.masses.tolist()
        out["max_abs_difference"] = float(np.max(np.abs(facet.masses - push.masses)))
    return out, report is None or report.converged


def cmd_check_gradient(problem, grid, args):
    f, report = _support(problem, grid)
    shape = wulff(problem.measure, f)
    analytic = surface_measure_pushforward(shape, grid).masses
    rows = []
    for j in range(len(f)):
        e = np.zeros(len(f))
        e[j] = FD_STEP
        up = covolume(shape.with_support(f + e), grid)
        down = covolume(shape.with_support(f - e), grid)
        fd = (up - down) / (2.0 * FD_STEP)
        rel = abs(fd - analytic[j]) / abs(analytic[j]) if analytic[j] != 0.0 else abs(fd)
        rows.append({"analytic": float(analytic[j]), "finite_difference": fd, "index": j, "relative_error": rel})
    out = {
        "f": [float(x) for x in f],
        "max_relative_error": max(r["relative_error"] for r in rows),
        "step": FD_STEP,
        "table": rows,
    }
    return out, report is None or report.converged


def cmd_exhaust(problem, grid, args):
    plan = problem.plan or single_stage(problem.measure)
    regrids = any(key.startswith("grid_") for o in plan.overrides for key in o)
    result = solve_exhaustive(problem.measure, plan, problem.config, grid=None if regrids else grid, strict=False)
    return result.to_dict(), all(r.converged for r in result.reports)


def cmd_oracle(problem, grid, args):
    f, report = _support(problem, grid)
    shape = wulff(problem.measure, f)
    est, err = mc_covolume_oracle(shape, problem.oracle["samples"], problem.oracle["seed"])
    quad = covolume(shape, grid)
    out = {
        "estimate": est,
        "f": [float(x) for x in f],
        "quadrature": quad,
        "samples": problem.oracle["samples"],
        "seed": problem.oracle["seed"],
        "stderr": err,
        "z_score": (quad - est) / err if err > 0.0 else None,
    }
    return out, report is None or report.converged


HANDLERS = {
    "solve": cmd_solve,
    "covolume": cmd_covolume,
    "surface": cmd_surface,
    "check-gradient": cmd_check_gradient,
    "exhaust": cmd_exhaust,
    "oracle": cmd_oracle,
}


def _parser():
    p = argparse.ArgumentParser(prog="gmc", description="Discrete Gaussian-Minkowski problems in pointed cones.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file", help="problem file (JSON)")
    p.add_argument("--seed", type=int, help="seed for Monte Carlo grids and the oracle")
    p.add_argument("--grid", type=int, help="grid resolution (nodes, rings or subdivision level by scheme)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--csv", help="solve: write (angle parameters, rho) samples of the solution")
    return p


def _fail(exc, code):
    info = {
        "error": getattr(exc, "kind", type(exc).__name__),
        "field": getattr(exc, "field", None),
        "message": str(exc),
    }
    if isinstance(exc, StageFailed):
        info["stage"] = exc.stage
    print(json.dumps(info, sort_keys=True), file=sys.stderr)
    return code


def run(argv=None):
    """Run one command; returns the exit status."""
    args = _parser().parse_args(argv)
    try:
        problem = load_problem(args.file)
        raw = _apply_overrides(problem.raw, args)
        problem = parse_problem(raw)
        cfg = problem.config
        grid = build_grid(problem.cone, cfg.grid_resolution, cfg.grid_scheme, cfg.grid_seed)
        body, converged = HANDLERS[args.command](problem, grid, args)
    except OSError as exc:
        return _fail(ProblemError(str(exc), "file", type(exc).__name__), EXIT_INVALID)
    except ValidationError as exc:
        return _fail(exc, EXIT_INVALID)
    except GMCError as exc:
        return _fail(exc, EXIT_NOT_CONVERGED)
    report = {"command": args.command, "grid": _grid_info(grid), "problem": problem.to_dict(), **body}
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
