"""Solving on nested direction sets omega_1 ⊂ omega_2 ⊂ ... of a master measure.

Stage i solves the problem for the restriction mu⌞omega_i, warm-started from
the previous stage's support vector on the shared atoms. Newly added atoms
start at the probe value delta_0 of the stage measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .cone import build_grid
from .errors import GMCError, InvalidPlan, StageFailed, ValidationError
from .pseudo_cone import DiscreteMeasure
from .solver import SolverConfig, initialization_probe, solve

_CONFIG_FIELDS = {f.name for f in fields(SolverConfig)}


@dataclass(frozen=True)
class ExhaustionPlan:
    """Nested index sets over a master measure, with optional per-stage
    SolverConfig overrides (dicts of field values)."""

    stages: tuple
    overrides: tuple = ()

    def __post_init__(self):
        stages = tuple(tuple(int(j) for j in s) for s in self.stages)
        overrides = tuple(dict(o) for o in self.overrides)
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "overrides", overrides)

    def validate(self, measure):
        m = len(measure)
        if not self.stages:
            raise InvalidPlan("plan needs at least one stage")
        if not self.stages[0]:
            raise InvalidPlan("stage 0 is empty; the first direction set must carry positive mass")
        prev = set()
        for i, stage in enumerate(self.stages):
            cur = set(stage)
            if len(cur) != len(stage):
                raise InvalidPlan(f"stage {i} repeats an index")
            bad = [j for j in stage if not 0 <= j < m]
            if bad:
                raise InvalidPlan(f"stage {i} has indices outside [0, {m}): {bad}")
            if not prev <= cur:
                raise InvalidPlan(f"stage {i} drops indices {sorted(prev - cur)} of stage {i - 1}")
            prev = cur
        if len(prev) != m:
            raise InvalidPlan(f"the last stage misses atoms {sorted(set(range(m)) - prev)}")
        if len(self.overrides) not in (0, len(self.stages)):
            raise InvalidPlan("overrides must be empty or given once per stage")
        for i, o in enumerate(self.overrides):
            unknown = set(o) - _CONFIG_FIELDS
            if unknown:
                raise InvalidPlan(f"stage {i} overrides unknown solver fields {sorted(unknown)}")

    def config(self, i, cfg):
        if not self.overrides or not self.overrides[i]:
            return cfg
        return replace(cfg, **self.overrides[i])


def single_stage(measure):
    return ExhaustionPlan(stages=(tuple(range(len(measure))),))


@dataclass(frozen=True, eq=False)
class ExhaustionResult:
    plan: ExhaustionPlan
    reports: tuple
    stage_diffs: tuple
    b: tuple
    b_slack: tuple
    lambda_bound: float
    feasible: tuple
    omega1_mass: tuple
    omega1_target: float
    summary: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.reports[-1]

    def to_dict(self):
        return {
            "stages": [
                {"indices": list(s), "report": r.to_dict()} for s, r in zip(self.plan.stages, self.reports)
            ],
            "summary": dict(self.summary),
        }


def _warm_start(prev_indices, prev_f, indices, delta):
    pos = {j: k for k, j in enumerate(prev_indices)}
    return np.array([prev_f[pos[j]] if j in pos else delta for j in indices])


def solve_exhaustive(measure, plan, cfg=None, grid=None, strict=True):
    """Solve stage by stage and summarize how the solutions settle.

    The summary holds the sup-norm change of f* between successive stages
    on their shared atoms, b(K_i) with its grid slack against the bound
    Lambda, per-stage feasibility, and the scaled surface mass on omega_1
    (which must stay at least mu(omega_1) up to the residual). With
    ``strict`` a stage that fails or does not converge raises StageFailed.
    """
    if not isinstance(measure, DiscreteMeasure):
        raise ValidationError("solve_exhaustive expects a DiscreteMeasure")
    cfg = cfg or SolverConfig()
    plan.validate(measure)
    grids = {}
    reports = []
    prev = None
    for i, stage in enumerate(plan.stages):
        stage_cfg = plan.config(i, cfg)
        stage_cfg.validate(measure.cone.dim)
        sub = measure.restrict(stage)
        key = (stage_cfg.grid_scheme, str(stage_cfg.grid_resolution), stage_cfg.grid_seed)
        g = grid if grid is not None else grids.get(key)
        if g is None:
            g = grids[key] = build_grid(measure.cone, stage_cfg.grid_resolution, stage_cfg.grid_scheme, stage_cfg.grid_seed)
        try:
            if prev is None:
                report = solve(sub, stage_cfg, grid=g)
            else:
                delta = initialization_probe(sub, stage_cfg, g)
                init = _warm_start(plan.stages[i - 1], prev.support, stage, delta)
                report = solve(sub, stage_cfg, grid=g, init=init)
        except GMCError as exc:
            raise StageFailed(f"stage {i}: {exc}", stage=i, report=getattr(exc, "report", None)) from exc
        if strict and not report.converged:
            raise StageFailed(
                f"stage {i}: solver stopped ({report.status}) with residual {report.residual:.3g}", stage=i, report=report
            )
        reports.append(report)
        prev = report

    first = plan.stages[0]
    diffs = []
    for i in range(1, len(reports)):
        common = _warm_start(plan.stages[i - 1], reports[i - 1].support, plan.stages[i], np.nan)
        keep = ~np.isnan(common)
        diffs.append(float(np.max(np.abs(reports[i].support[keep] - common[keep]))))
    omega1_target = float(np.sum(measure.weights[list(first)]))
    omega1_mass = []
    for stage, r in zip(plan.stages, reports):
        pos = [stage.index(j) for j in first]
        scale = r.covolume ** (r.alpha - 1.0) + r.kkt_lambda
        omega1_mass.append(float(scale * np.sum(r.surface_measure[pos])))
    b = tuple(r.b for r in reports)
    b_slack = tuple(r.b_slack for r in reports)
    lam = reports[0].lambda_bound
    feasible = tuple(bool(r.covolume <= r.level + 1e-8) for r in reports)
    summary = {
        "b": list(b),
        "b_positive": all(x > 0.0 for x in b),
        "b_within_bound": all(x <= lam + s for x, s in zip(b, b_slack)),
        "converged": [bool(r.converged) for r in reports],
        "feasible": list(feasible),
        "lambda_bound": lam,
        "omega1_mass": omega1_mass,
        "omega1_mass_ok": all(
            mass >= omega1_target * (1.0 - r.residual) - 1e-15 for mass, r in zip(omega1_mass, reports)
        ),
        "omega1_target": omega1_target,
        "stage_diffs": diffs,
    }
    return ExhaustionResult(
        plan=plan,
        reports=tuple(reports),
        stage_diffs=tuple(diffs),
        b=b,
        b_slack=b_slack,
        lambda_bound=lam,
        feasible=feasible,
        omega1_mass=tuple(omega1_mass),
        omega1_target=omega1_target,
        summary=summary,
    )
