"""JSON problem files: parsing with field-anchored errors, and canonical echo.

A problem file is a JSON object::

    {
      "cone": {"type": "polyhedral", "generators": [[1, 0], [0, 1]]},
      "measure": [{"direction": [-1, -1], "weight": 0.1}],
      "alpha": 1.0,
      "solver": {"residual_tol": 1e-3},
      "grid": {"scheme": "angular-product", "resolution": 16384, "seed": 0},
      "support": [0.5],
      "plan": {"stages": [[0], [0, 1]], "overrides": [{}, {}]},
      "oracle": {"samples": 1000000, "seed": 7}
    }

Only ``cone`` and ``measure`` are required. In planar problems an atom may
give ``"angle"`` (the polar angle of its direction) instead of
``"direction"``; angles anywhere need an explicit ``"angle_unit"``.
"""

from __future__ import annotations

import json
import math
from contextlib import contextmanager
from dataclasses import dataclass, fields

import numpy as np

from .cone import angle_factor, make_cone
from .errors import GMCError, InvalidMeasure, ValidationError
from .exhaustion import ExhaustionPlan
from .pseudo_cone import DiscreteMeasure, WulffShape
from .solver import SolverConfig

TOP_LEVEL = ("alpha", "angle_unit", "cone", "grid", "measure", "oracle", "plan", "solver", "support")
GRID_KEYS = ("resolution", "scheme", "seed")
ORACLE_KEYS = ("samples", "seed")
PLAN_KEYS = ("overrides", "stages")
DEFAULT_ORACLE = {"samples": 1_000_000, "seed": 0}
_SOLVER_KEYS = tuple(sorted(f.name for f in fields(SolverConfig) if f.name != "alpha" and not f.name.startswith("grid_")))


class ProblemError(ValidationError):
    """Problem file failed validation; ``field`` locates the offending entry."""

    def __init__(self, message, field=None, kind=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
        self.kind = kind or type(self).__name__


@contextmanager
def _at(field):
    try:
        yield
    except ProblemError:
        raise
    except (GMCError, KeyError, TypeError, ValueError) as exc:
        msg = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        raise ProblemError(msg, field, type(exc).__name__) from exc


def _check_keys(obj, allowed, field):
    if not isinstance(obj, dict):
        raise ProblemError("expected an object", field)
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ProblemError(f"unknown keys {unknown}", field)


@dataclass(frozen=True, eq=False)
class Problem:
    raw: dict
    cone: object
    measure: DiscreteMeasure
    alpha: float
    config: SolverConfig
    support: np.ndarray | None
    plan: ExhaustionPlan | None
    oracle: dict

    def shape(self):
        return WulffShape(self.cone, self.measure.directions, self.support)

    def to_dict(self):
        """The problem as parsed, suitable for echoing in reports."""
        return json.loads(json.dumps(self.raw))


def _atom_direction(atom, i, dim, unit):
    has_dir, has_angle = "direction" in atom, "angle" in atom
    if has_dir == has_angle:
        raise ProblemError("give exactly one of 'direction' or 'angle'", f"measure[{i}]")
    if has_dir:
        v = atom["direction"]
        if not isinstance(v, list) or len(v) != dim:
            raise ProblemError(f"direction must be a list of {dim} numbers", f"measure[{i}].direction")
        return [float(x) for x in v]
    if dim != 2:
        raise ProblemError("angles describe directions only for n = 2", f"measure[{i}].angle")
    if unit is None:
        raise ProblemError("angles need a top-level angle_unit", f"measure[{i}].angle")
    t = float(atom["angle"]) * angle_factor(unit)
    return [math.cos(t), math.sin(t)]


def parse_problem(data):
    """Validate a decoded problem object and build its parts."""
    _check_keys(data, TOP_LEVEL, "problem")
    for key in ("cone", "measure"):
        if key not in data:
            raise ProblemError("required", key)
    with _at("cone"):
        cone = make_cone(data["cone"])
    unit = data.get("angle_unit")
    if unit is not None:
        with _at("angle_unit"):
            angle_factor(unit)
    atoms = data["measure"]
    if not isinstance(atoms, list) or not atoms:
        raise ProblemError("expected a nonempty list of atoms", "measure")
    dirs, weights = [], []
    for i, atom in enumerate(atoms):
        _check_keys(atom, ("angle", "direction", "weight"), f"measure[{i}]")
        with _at(f"measure[{i}]"):
            dirs.append(_atom_direction(atom, i, cone.dim, unit))
            weights.append(float(atom["weight"]))
    try:
        measure = DiscreteMeasure(cone, dirs, weights)
    except InvalidMeasure as exc:
        field = "measure" if exc.index is None else f"measure[{exc.index}]"
        raise ProblemError(str(exc), field, "InvalidMeasure") from exc

    with _at("alpha"):
        alpha = float(data.get("alpha", 1.0))
    solver = data.get("solver", {})
    _check_keys(solver, _SOLVER_KEYS, "solver")
    grid = data.get("grid", {})
    _check_keys(grid, GRID_KEYS, "grid")
    with _at("solver"):
        cfg = SolverConfig(
            alpha=alpha,
            grid_scheme=grid.get("scheme"),
            grid_resolution=grid.get("resolution"),
            grid_seed=int(grid.get("seed", 0)),
            **solver,
        )
        cfg.validate(cone.dim)

    support = None
    if "support" in data:
        with _at("support"):
            support = np.asarray(data["support"], dtype=float)
            if support.shape != (len(measure),):
                raise ValidationError(f"expected {len(measure)} values, got shape {support.shape}")
            WulffShape(cone, measure.directions, support)

    plan = None
    if "plan" in data:
        _check_keys(data["plan"], PLAN_KEYS, "plan")
        with _at("plan"):
            plan = ExhaustionPlan(
                stages=tuple(data["plan"]["stages"]), overrides=tuple(data["plan"].get("overrides", ()))
            )
            plan.validate(measure)

    oracle = dict(DEFAULT_ORACLE)
    if "oracle" in data:
        _check_keys(data["oracle"], ORACLE_KEYS, "oracle")
        with _at("oracle"):
            oracle.update({k: int(v) for k, v in data["oracle"].items()})
            if oracle["samples"] < 10_000:
                raise ValidationError("oracle needs at least 10^4 samples")

    raw = json.loads(json.dumps(data))
    return Problem(raw, cone, measure, alpha, cfg, support, plan, oracle)


def load_problem(path):
    """Read and parse a problem file; JSON syntax errors report line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", "file") from exc
    return parse_problem(data)


def dumps(obj):
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"
