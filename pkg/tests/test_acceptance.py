"""The twelve acceptance criteria, one test each.

A summary line per criterion is printed at the end of the pytest run.
"""

import json
import math

import numpy as np
import pytest

import oracles
from gmc.cli import run
from gmc.cone import build_grid, circular_cone, cone_gaussian_mass, lambda_bound, polyhedral_cone
from gmc.exhaustion import ExhaustionPlan, solve_exhaustive
from gmc.instances import random_active_shape, measure_of
from gmc.measures import (
    covolume,
    evaluate,
    mc_covolume_oracle,
    surface_measure_facet,
    surface_measure_pushforward,
    tail_series,
    tail_terms,
)
from gmc.pseudo_cone import DiscreteMeasure, WulffShape
from gmc.solver import SolverConfig, solve

FD_STEP = 1e-4


def planar_cone(rng):
    a = rng.uniform(-math.pi, math.pi)
    opening = rng.uniform(0.5, 2.5)
    return polyhedral_cone([[math.cos(a), math.sin(a)], [math.cos(a + opening), math.sin(a + opening)]])


@pytest.fixture(scope="module")
def planar_instances():
    """20 strictly active planar shapes, m <= 6, half of them on random cones."""
    rng = np.random.default_rng(20240601)
    out = []
    for k in range(20):
        cone = polyhedral_cone([[1.0, 0.0], [0.0, 1.0]]) if k % 2 == 0 else planar_cone(rng)
        grid = build_grid(cone)
        shape = random_active_shape(cone, int(rng.integers(1, 7)), rng, grid=grid)
        out.append((shape, grid))
    return out


@pytest.mark.acceptance(1, "cone mass exactness (quarter plane, circular n=3, octant)")
def test_criterion_01_cone_mass(quarter, cap3, octant):
    assert abs(cone_gaussian_mass(quarter) - 0.25) <= 1e-9
    assert abs(cone_gaussian_mass(cap3) - 0.25) <= 1e-9
    assert abs(cone_gaussian_mass(octant) - 0.125) <= 1e-6
    grid = build_grid(octant)
    assert abs(float(np.sum(grid.weights)) / (4.0 * math.pi) - 0.125) <= 1e-6


@pytest.mark.acceptance(2, "Lambda anchor for the quarter plane")
def test_criterion_02_lambda_anchor(quarter):
    lam = lambda_bound(quarter)
    assert abs(lam - math.sqrt(2.0 * math.log(2.0))) <= 1e-6
    assert abs(lam - oracles.lambda_by_bisection(2)) <= 1e-6


@pytest.mark.acceptance(3, "gradient identity: FD of co-volume vs push-forward, 20 instances")
def test_criterion_03_gradient_identity(planar_instances):
    worst = 0.0
    for shape, grid in planar_instances:
        assert len(grid) >= 4096
        s = surface_measure_pushforward(shape, grid).masses
        f = shape.support
        for j in range(len(f)):
            e = np.zeros(len(f))
            e[j] = FD_STEP
            fd = (covolume(shape.with_support(f + e), grid) - covolume(shape.with_support(f - e), grid)) / (2 * FD_STEP)
            worst = max(worst, abs(fd - s[j]) / s[j])
    assert worst <= 1e-3, worst


@pytest.mark.acceptance(4, "dual-route agreement (facet vs push-forward) and S_1 anchor")
def test_criterion_04_dual_route(planar_instances, quarter, quarter_grid, axis2):
    for shape, grid in planar_instances:
        push = surface_measure_pushforward(shape, grid).masses
        facet = surface_measure_facet(shape).masses
        assert np.max(np.abs(push - facet)) <= 1e-4
    single = WulffShape(quarter, [-axis2], [1.0])
    expected = math.exp(-0.5) * math.erf(1.0 / math.sqrt(2.0)) / math.sqrt(2.0 * math.pi)
    assert abs(expected - oracles.S_SINGLE_F1) <= 1e-15
    assert abs(surface_measure_facet(single)[0] - expected) <= 1e-5
    assert abs(surface_measure_pushforward(single, quarter_grid)[0] - expected) <= 1e-5


@pytest.mark.acceptance(5, "co-volume quadrature vs Monte Carlo oracle (10^6 samples, 3 s.e.)")
def test_criterion_05_monte_carlo(planar_instances):
    for k, (shape, grid) in enumerate(planar_instances[:10]):
        est, err = mc_covolume_oracle(shape, 1_000_000, seed=1000 + k)
        assert abs(covolume(shape, grid) - est) <= 3.0 * err, (k, covolume(shape, grid), est, err)


@pytest.fixture(scope="module")
def inverse_crime_runs(quarter, quarter_grid):
    rng = np.random.default_rng(7)
    beta = cone_gaussian_mass(quarter)
    runs = []
    for _ in range(10):
        shape = random_active_shape(quarter, int(rng.integers(2, 7)), rng, grid=quarter_grid, covolume_cap=0.4 * beta)
        cov, s = evaluate(shape, quarter_grid)
        assert cov < 0.4 * beta
        for alpha in (1.0, 2.0):
            mu = measure_of(shape, cov ** (alpha - 1.0) * s)
            runs.append((alpha, solve(mu, SolverConfig(alpha=alpha), grid=quarter_grid)))
    return runs


@pytest.mark.acceptance(6, "inverse-crime recovery, alpha in {1, 2}")
def test_criterion_06_inverse_crime(inverse_crime_runs):
    assert {a for a, _ in inverse_crime_runs} == {1.0, 2.0}
    for alpha, report in inverse_crime_runs:
        assert report.residual <= 1e-3, (alpha, report.residual)
        assert report.converged


@pytest.mark.acceptance(7, "feasibility of solver output; large-measure instance hits the constraint")
def test_criterion_07_feasibility(inverse_crime_runs, quarter, quarter_grid, axis2):
    for _, report in inverse_crime_runs:
        assert report.covolume <= report.beta / 2 + 1e-8
    report = solve(DiscreteMeasure(quarter, [-axis2], [1.0]), SolverConfig(alpha=1.0), grid=quarter_grid)
    assert report.covolume <= report.beta / 2 + 1e-8
    assert report.constraint_active
    assert abs(report.covolume - 0.125) <= 1e-4
    assert report.kkt_lambda > 0.0
    _, peak = oracles.surface_peak()
    assert peak < 1.0


@pytest.mark.acceptance(8, "small-root selection for mu_1 = 0.1")
def test_criterion_08_small_root(quarter, quarter_grid, axis2):
    root = oracles.small_root(0.1)
    assert abs(root - oracles.SMALL_ROOT_MU01) <= 1e-12
    report = solve(DiscreteMeasure(quarter, [-axis2], [0.1]), SolverConfig(alpha=1.0), grid=quarter_grid)
    assert not report.constraint_active
    assert abs(report.support[0] - root) <= 1e-3
    boundary = oracles.boundary_scale()
    f_star = 0.1 * report.support[0] - oracles.single_direction_covolume(report.support[0])
    f_boundary = 0.1 * boundary - oracles.single_direction_covolume(boundary)
    assert f_star > f_boundary
    assert report.objective > f_boundary


@pytest.mark.acceptance(9, "tail series value and ratio test")
def test_criterion_09_tail_series():
    value = tail_series(1.0, 2, 0)
    assert abs(value - 0.75331) <= 1e-5
    assert abs(value - oracles.direct_tail(1.0, 2, 0)) <= 1e-12
    terms = tail_terms(1.0, 2, 21)
    ratios = terms[1:] / terms[:-1]
    assert np.all(np.diff(ratios) < 0.0)
    assert ratios[-1] < 1e-8
    for n in (3, 5):
        r = tail_terms(0.5, n, 21)
        assert np.all(np.diff(r[1:] / r[:-1]) < 0.0)


@pytest.mark.acceptance(10, "continuity of co-volume and surface measure under f + t*1")
def test_criterion_10_continuity(planar_instances):
    ts = (1e-2, 1e-3, 1e-4)
    for shape, grid in planar_instances:
        cov0, s0 = evaluate(shape, grid)
        dcov, ds = [], []
        for t in ts:
            cov, s = evaluate(shape.with_support(shape.support + t), grid)
            dcov.append(abs(cov - cov0))
            ds.append(np.abs(s - s0))
        for k in range(1, len(ts)):
            ratio = ts[k] / ts[0]
            assert dcov[k] <= 1.5 * ratio * dcov[0] + 1e-15
            assert np.all(ds[k] <= 1.5 * ratio * ds[0] + 1e-15)
            assert dcov[k] < dcov[k - 1]


@pytest.mark.acceptance(11, "exhaustion consistency with a direct solve; b(K_i) in (0, Lambda]")
def test_criterion_11_exhaustion(quarter, quarter_grid):
    rng = np.random.default_rng(11)
    shape = random_active_shape(quarter, 5, rng, grid=quarter_grid, covolume_cap=0.3)
    cov, s = evaluate(shape, quarter_grid)
    mu = measure_of(shape, cov * s)
    cfg = SolverConfig(alpha=2.0)
    result = solve_exhaustive(mu, ExhaustionPlan(stages=[(0, 2, 4), range(5)]), cfg, grid=quarter_grid)
    direct = solve(mu, SolverConfig(alpha=2.0, multistart=2), grid=quarter_grid)
    tol = 2.0 * cfg.residual_tol
    assert np.max(np.abs(result.final.support - direct.support)) <= tol * np.max(direct.support)
    assert abs(result.final.covolume - direct.covolume) <= tol * direct.covolume
    for b, slack in zip(result.b, result.b_slack):
        assert 0.0 < b <= result.lambda_bound + slack
    assert all(result.feasible)
    assert result.summary["omega1_mass_ok"]


@pytest.mark.acceptance(12, "determinism: repeated solve runs give byte-identical reports")
def test_criterion_12_determinism(tmp_path):
    problem = {
        "cone": {"type": "circular", "axis": [1, 1], "half_angle": 40, "angle_unit": "degrees"},
        "angle_unit": "degrees",
        "measure": [{"angle": 210, "weight": 0.02}, {"angle": 235, "weight": 0.03}],
        "alpha": 1.0,
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(problem))
    outputs = []
    for scheme_args in ([], ["--grid", "8192"]):
        for k in range(2):
            out = tmp_path / f"r{len(outputs)}.json"
            assert run(["solve", str(path), "--seed", "3", "--out", str(out)] + scheme_args) == 0
            outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[2] == outputs[3]
    mc = dict(problem, grid={"scheme": "monte-carlo", "resolution": 40000})
    path.write_text(json.dumps(mc))
    runs = []
    for k in range(2):
        out = tmp_path / f"mc{k}.json"
        assert run(["solve", str(path), "--seed", "5", "--out", str(out)]) in (0, 3)
        runs.append(out.read_bytes())
    assert runs[0] == runs[1]
