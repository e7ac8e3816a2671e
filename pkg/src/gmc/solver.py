"""Constrained variational solver for the discrete Gaussian-Minkowski problem.

Maximizes

    F(f) = sum_j f_j mu_j - (1/alpha) covol([f])^alpha

over positive support vectors f subject to covol([f]) <= beta/2. At an
interior maximizer covol^(alpha-1) S_j = mu_j for every atom; on the
constraint boundary the KKT system (covol^(alpha-1) + lam) S_j = mu_j holds
with a multiplier lam >= 0 instead.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .cone import build_grid, cone_gaussian_mass, lambda_bound
from .errors import InfeasibleEval, InvalidConfig, InvalidMeasure, MaxIterations, ProbeFailed
from .measures import evaluate
from .pseudo_cone import DiscreteMeasure, min_distance, min_distance_slack, wulff

log = logging.getLogger(__name__)

MAX_HALVINGS = 60


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    grid_scheme: str | None = None
    grid_resolution: tuple | int | None = None
    grid_seed: int = 0
    gtol: float = 1e-8
    kkt_stop: float = 1e-6
    residual_tol: float = 1e-3
    max_iter: int = 500
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    init_scale: float | str = "auto"
    positivity_floor: float = 1e-12
    active_tol: float = 1e-9
    multistart: int = 0

    def validate(self, dim):
        if not self.alpha * dim > 1.0 + 1e-12:
            raise InvalidConfig(f"alpha must exceed 1/n = {1.0 / dim:.6g}, got {self.alpha}")
        if self.alpha < 1.0:
            warnings.warn(
                f"alpha = {self.alpha} < 1: the compact-support problem is solvable but the exhaustion "
                "limit is only established for alpha >= 1",
                stacklevel=3,
            )
        for name in ("gtol", "kkt_stop", "residual_tol", "armijo", "positivity_floor", "active_tol"):
            if not getattr(self, name) > 0.0:
                raise InvalidConfig(f"{name} must be positive")
        if not 0.0 < self.backtrack < 1.0:
            raise InvalidConfig("backtrack must lie in (0, 1)")
        if self.max_iter < 1 or self.max_backtracks < 1 or self.multistart < 0:
            raise InvalidConfig("iteration counts must be positive")
        if self.init_scale != "auto" and not float(self.init_scale) > 0.0:
            raise InvalidConfig("init_scale must be 'auto' or a positive number")


@dataclass(frozen=True, eq=False)
class SolveReport:
    support: np.ndarray
    covolume: float
    surface_measure: np.ndarray
    scaled_measure: np.ndarray
    residual: float
    kkt_lambda: float
    constraint_active: bool
    objective: float
    iterations: int
    converged: bool
    status: str
    gradient_norm: float
    alpha: float
    beta: float
    level: float
    b: float
    b_slack: float
    lambda_bound: float
    pinned: tuple
    grid: dict
    history: tuple = field(default=(), repr=False)

    @property
    def b_within_bound(self):
        return self.b <= self.lambda_bound + self.b_slack

    def to_dict(self):
        """JSON-ready view with stable key order (history omitted)."""
        return {
            "alpha": self.alpha,
            "b": self.b,
            "b_slack": self.b_slack,
            "b_within_bound": bool(self.b_within_bound),
            "beta": self.beta,
            "constraint_active": bool(self.constraint_active),
            "converged": bool(self.converged),
            "covolume": self.covolume,
            "f": [float(x) for x in self.support],
            "gradient_norm": self.gradient_norm,
            "grid": dict(self.grid),
            "iterations": int(self.iterations),
            "kkt_lambda": self.kkt_lambda,
            "lambda_bound": self.lambda_bound,
            "level": self.level,
            "objective": self.objective,
            "pinned": [int(j) for j in self.pinned],
            "residual": self.residual,
            "scaled_measure": [float(x) for x in self.scaled_measure],
            "status": self.status,
            "surface_measure": [float(x) for x in self.surface_measure],
        }


@dataclass(frozen=True, eq=False)
class _State:
    f: np.ndarray
    cov: float
    masses: np.ndarray
    value: float
    grad: np.ndarray


def _grid_for(measure, cfg, grid):
    if grid is None:
        return build_grid(measure.cone, cfg.grid_resolution, cfg.grid_scheme, cfg.grid_seed)
    if grid.cone is not measure.cone:
        raise InvalidMeasure("grid and measure refer to different cones")
    return grid


def _state(f, measure, cfg, grid):
    cov, masses = evaluate(wulff(measure, f), grid)
    if cov > cone_gaussian_mass(measure.cone):
        raise InfeasibleEval(f"co-volume {cov} exceeds the cone mass")
    a = cfg.alpha
    value = float(f @ measure.weights) - cov**a / a
    grad = measure.weights - cov ** (a - 1.0) * masses
    return _State(f=f, cov=cov, masses=masses, value=value, grad=grad)


def eval_objective(f, measure, cfg, grid):
    """F(f) = <f, mu> - covol([f])^alpha / alpha."""
    f = np.asarray(f, dtype=float)
    return _state(f, measure, cfg, grid).value


def gradient(f, measure, cfg, grid):
    """First variation of F: mu_j - covol^(alpha-1) S_j (push-forward route)."""
    f = np.asarray(f, dtype=float)
    return _state(f, measure, cfg, grid).grad


def initialization_probe(measure, cfg, grid):
    """Largest delta = 2^-k (k <= 60) with F(delta * 1) > 0 and delta * 1 feasible."""
    cfg.validate(measure.cone.dim)
    level = 0.5 * cone_gaussian_mass(measure.cone)
    delta = 1.0
    ones = np.ones(len(measure))
    for _ in range(MAX_HALVINGS + 1):
        st = _state(delta * ones, measure, cfg, grid)
        if st.cov <= level and st.value > 0.0:
            return delta
        delta *= 0.5
    raise ProbeFailed(f"F(delta) stayed non-positive after {MAX_HALVINGS} halvings")


def _restore(f, measure, grid, level, tol=1e-13):
    """Scale f by the largest c <= 1 that keeps the co-volume at most ``level``.

    Safeguarded Newton on c, using d covol(c f)/dc = <f, S(c f)>; the
    returned point is always feasible and within ``tol * level`` of the level.
    """
    shape = wulff(measure, f)
    cov, masses = evaluate(shape, grid)
    if cov <= level:
        return f
    lo, hi = 0.0, 1.0
    c, excess, slope = 1.0, cov - level, float(f @ masses)
    for _ in range(100):
        step = c - excess / slope if slope > 0.0 else 0.5 * (lo + hi)
        c = step if lo < step < hi else 0.5 * (lo + hi)
        cov, masses = evaluate(shape.scaled(c), grid)
        excess, slope = cov - level, float(f @ masses)
        if excess > 0.0:
            hi = c
        else:
            lo = c
            if -excess <= tol * level:
                break
        if hi - lo <= 4.0 * np.finfo(float).eps * hi:
            break
    return lo * f


def _project(d, masses, active):
    """Remove the outward normal component of d on the active constraint."""
    if not active:
        return d
    nn = float(masses @ masses)
    out = float(d @ masses)
    if nn == 0.0 or out <= 0.0:
        return d
    return d - (out / nn) * masses


def _tangent(g, masses, active):
    """Component of g along the constraint surface (the Lagrangian gradient)."""
    nn = float(masses @ masses)
    if not active or nn == 0.0:
        return g
    return g - (float(g @ masses) / nn) * masses


def _kkt(st, measure, cfg, active):
    mu = measure.weights
    base = st.cov ** (cfg.alpha - 1.0)
    lam = 0.0
    if active:
        s = st.masses
        nn = float(s @ s)
        if nn > 0.0:
            lam = max(0.0, float((mu - base * s) @ s) / nn)
    scaled = (base + lam) * st.masses
    residual = float(np.max(np.abs(scaled - mu) / mu))
    return lam, residual


def _ascend(measure, cfg, grid, f0):
    level = 0.5 * cone_gaussian_mass(measure.cone)
    floor = cfg.positivity_floor
    f = _restore(np.asarray(f0, dtype=float), measure, grid, level)
    st = _state(f, measure, cfg, grid)
    history = [st.value]
    inv_h = None
    status = "max_iterations"
    it = 0
    t_prev = 1.0
    for it in range(1, cfg.max_iter + 1):
        active = level - st.cov <= cfg.active_tol * level
        pg = _project(st.grad, st.masses, active)
        if float(np.max(np.abs(pg))) <= cfg.gtol or _kkt(st, measure, cfg, active)[1] <= cfg.kkt_stop:
            status = "converged"
            it -= 1
            break
        if inv_h is None:
            d = st.grad * (0.1 * float(np.max(st.f)) / float(np.max(np.abs(st.grad))))
        else:
            d = inv_h @ st.grad
        d = _project(d, st.masses, active)
        if float(st.grad @ d) <= 0.0:
            inv_h = None
            d = pg * (0.1 * float(np.max(st.f)) / float(np.max(np.abs(pg))))
        shrink = d < 0.0
        t = min(1.0, 4.0 * t_prev) if active else 1.0
        if np.any(shrink):
            t = min(t, float(np.min(0.5 * st.f[shrink] / -d[shrink])))
        new = None
        for _ in range(cfg.max_backtracks):
            trial = st.f + t * d
            if np.all(trial > floor):
                trial = _restore(trial, measure, grid, level)
                if np.all(trial > floor):
                    cand = _state(trial, measure, cfg, grid)
                    gain = max(float(st.grad @ (trial - st.f)), 0.0)
                    if cand.value > st.value + cfg.armijo * gain:
                        new = cand
                        break
            t *= cfg.backtrack
        if new is None:
            # F no longer improves in floating point; accept if stationary enough
            status = "converged" if _kkt(st, measure, cfg, active)[1] <= cfg.residual_tol else "stalled"
            break
        t_prev = t
        new_active = level - new.cov <= cfg.active_tol * level
        both = active and new_active
        s = new.f - st.f
        y = _tangent(st.grad, st.masses, both) - _tangent(new.grad, new.masses, both)
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            if inv_h is None:
                inv_h = (sy / float(y @ y)) * np.eye(len(s))
            r = 1.0 / sy
            left = np.eye(len(s)) - r * np.outer(s, y)
            inv_h = left @ inv_h @ left.T + r * np.outer(s, s)
        st = new
        history.append(st.value)
    return st, it, status, tuple(history)


def _report(st, iterations, status, measure, cfg, grid):
    level = 0.5 * cone_gaussian_mass(measure.cone)
    active = level - st.cov <= cfg.active_tol * level
    lam, residual = _kkt(st, measure, cfg, active)
    pg = _project(st.grad, st.masses, active)
    shape = wulff(measure, st.f)
    base = st.cov ** (cfg.alpha - 1.0)
    pinned = tuple(int(j) for j in np.flatnonzero(st.f <= 10.0 * cfg.positivity_floor))
    if pinned:
        log.warning("support components %s sit at the positivity floor", pinned)
    return SolveReport(
        support=st.f.copy(),
        covolume=st.cov,
        surface_measure=st.masses.copy(),
        scaled_measure=base * st.masses,
        residual=residual,
        kkt_lambda=lam,
        constraint_active=bool(active),
        objective=st.value,
        iterations=iterations,
        converged=residual <= cfg.residual_tol,
        status=status,
        gradient_norm=float(np.max(np.abs(pg))),
        alpha=cfg.alpha,
        beta=cone_gaussian_mass(measure.cone),
        level=level,
        b=min_distance(shape, grid),
        b_slack=min_distance_slack(shape, grid),
        lambda_bound=lambda_bound(measure.cone),
        pinned=pinned,
        grid={
            "nodes": len(grid),
            "resolution": list(grid.resolution),
            "scheme": grid.scheme,
            "seed": grid.seed,
            "spacing": grid.spacing,
        },
    )


def solve(measure, cfg=None, grid=None, init=None, strict=False):
    """Maximize F over positive support vectors with covol <= beta/2.

    Preconditioned (BFGS) projected gradient ascent with backtracking.
    Iterates stay feasible by radial scaling; on the constraint boundary the
    outward component of the direction is removed. Starts from the probe
    value delta_0 * 1 unless ``init`` is given. With ``strict`` a
    non-converged run raises MaxIterations carrying the best report.
    """
    if not isinstance(measure, DiscreteMeasure):
        raise InvalidMeasure("solve expects a DiscreteMeasure")
    cfg = cfg or SolverConfig()
    cfg.validate(measure.cone.dim)
    grid = _grid_for(measure, cfg, grid)
    m = len(measure)
    if init is None:
        if cfg.init_scale == "auto":
            delta = initialization_probe(measure, cfg, grid)
        else:
            delta = float(cfg.init_scale)
        starts = [delta * np.ones(m)]
        starts += [delta * 2.0**k * np.ones(m) for k in range(1, cfg.multistart + 1)]
    else:
        init = np.asarray(init, dtype=float)
        if init.shape != (m,) or np.any(init <= 0.0):
            raise InvalidConfig("init must be a positive vector with one entry per atom")
        starts = [init]

    best = None
    for f0 in starts:
        st, iterations, status, history = _ascend(measure, cfg, grid, f0)
        report = replace(_report(st, iterations, status, measure, cfg, grid), history=history)
        log.info("start %s: status=%s F=%.12g residual=%.3g", f0[:1], status, report.objective, report.residual)
        if best is None or (report.converged, report.objective) > (best.converged, best.objective):
            best = report
    if strict and not best.converged:
        raise MaxIterations(f"solver stopped ({best.status}) with residual {best.residual:.3g}", best)
    return best
