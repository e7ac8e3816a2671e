import math

import numpy as np
import pytest

from gmc.errors import InvalidPlan, StageFailed
from gmc.exhaustion import ExhaustionPlan, single_stage, solve_exhaustive
from gmc.instances import measure_of, random_active_shape
from gmc.measures import evaluate
from gmc.pseudo_cone import DiscreteMeasure
from gmc.solver import SolverConfig, solve


def unit_at(t):
    return np.array([math.cos(t), math.sin(t)])


@pytest.fixture(scope="module")
def five(quarter, quarter_grid):
    rng = np.random.default_rng(31)
    shape = random_active_shape(quarter, 5, rng, grid=quarter_grid, covolume_cap=0.1)
    cov, s = evaluate(shape, quarter_grid)
    return shape, measure_of(shape, cov * s)


def test_single_stage_is_direct_solve(five, quarter_grid):
    _, mu = five
    cfg = SolverConfig(alpha=2.0)
    result = solve_exhaustive(mu, single_stage(mu), cfg, grid=quarter_grid)
    direct = solve(mu, cfg, grid=quarter_grid)
    np.testing.assert_array_equal(result.final.support, direct.support)
    assert result.stage_diffs == ()


def test_three_stage_plan(five, quarter_grid):
    shape, mu = five
    plan = ExhaustionPlan(stages=[(2,), (1, 2, 3), range(5)])
    result = solve_exhaustive(mu, plan, SolverConfig(alpha=2.0), grid=quarter_grid)
    assert len(result.reports) == 3 and len(result.stage_diffs) == 2
    assert all(result.feasible)
    assert result.summary["b_positive"] and result.summary["b_within_bound"]
    assert result.summary["omega1_mass_ok"]
    np.testing.assert_allclose(result.final.support, shape.support, rtol=1e-4)
    for r, stage in zip(result.reports, plan.stages):
        assert len(r.support) == len(stage)
        assert r.covolume <= r.level + 1e-8
    d = result.to_dict()
    assert [s["indices"] for s in d["stages"]] == [list(s) for s in plan.stages]


def test_tiny_weight_stage_barely_moves(quarter, quarter_grid):
    dirs = [unit_at(math.pi + t) for t in (0.35, 0.785, 1.2, 0.1, 1.45)]
    mu = DiscreteMeasure(quarter, dirs, [0.04, 0.06, 0.04, 1e-6, 1e-6])
    cfg = SolverConfig(alpha=1.0)
    result = solve_exhaustive(mu, ExhaustionPlan(stages=[(0, 1, 2), range(5)]), cfg, grid=quarter_grid, strict=False)
    assert result.stage_diffs[0] <= 1e-4
    direct = solve(mu, cfg, grid=quarter_grid)
    np.testing.assert_allclose(result.final.support, direct.support, atol=1e-4)
    assert result.final.residual <= 1e-3


@pytest.mark.parametrize(
    "stages, overrides",
    [
        ([], ()),
        ([(), range(5)], ()),
        ([(0, 1), (1, 2, 3, 4)], ()),
        ([(0, 1), (0, 1, 2)], ()),
        ([(0, 0), range(5)], ()),
        ([(0, 7), range(5)], ()),
        ([(0,), range(5)], ({},)),
        ([(0,), range(5)], ({}, {"bogus": 1})),
    ],
)
def test_invalid_plans(five, stages, overrides):
    _, mu = five
    with pytest.raises(InvalidPlan):
        solve_exhaustive(mu, ExhaustionPlan(stages=stages, overrides=overrides))


def test_stage_failure_carries_stage(five, quarter_grid):
    _, mu = five
    plan = ExhaustionPlan(stages=[(0, 1), range(5)], overrides=[{}, {"max_iter": 1}])
    with pytest.raises(StageFailed) as exc:
        solve_exhaustive(mu, plan, SolverConfig(alpha=2.0), grid=quarter_grid)
    assert exc.value.stage == 1
    assert exc.value.report is not None
    relaxed = solve_exhaustive(mu, plan, SolverConfig(alpha=2.0), grid=quarter_grid, strict=False)
    assert relaxed.reports[1].status == "max_iterations"
