import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gmc.cli import run
from gmc.problem import ProblemError, load_problem, parse_problem

QUARTER = {"type": "polyhedral", "generators": [[1, 0], [0, 1]]}
SINGLE = {
    "cone": QUARTER,
    "measure": [{"direction": [-0.7071067811865476, -0.7071067811865476], "weight": 0.1}],
    "alpha": 1.0,
}
THREE = {
    "cone": {"type": "circular", "axis": [1, 1], "half_angle": 45, "angle_unit": "degrees"},
    "angle_unit": "degrees",
    "measure": [{"angle": 200, "weight": 0.02}, {"angle": 225, "weight": 0.03}, {"angle": 250, "weight": 0.02}],
    "alpha": 2.0,
    "plan": {"stages": [[1], [0, 1, 2]]},
    "oracle": {"samples": 100000, "seed": 4},
}


def write(tmp_path, obj, name="p.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def run_json(tmp_path, args):
    out = tmp_path / "out.json"
    code = run(args + ["--out", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def test_solve_report_schema(tmp_path):
    code, rep = run_json(tmp_path, ["solve", write(tmp_path, SINGLE)])
    assert code == 0
    for key in ("f", "covolume", "surface_measure", "residual", "kkt_lambda", "constraint_active", "iterations"):
        assert key in rep["result"]
    assert rep["command"] == "solve"
    assert rep["result"]["f"][0] == pytest.approx(0.339147172536551, abs=1e-5)


def test_direction_outside_cone_names_atom(tmp_path, capsys):
    bad = dict(SINGLE, measure=[SINGLE["measure"][0], {"direction": [0, -1], "weight": 0.1}])
    assert run(["solve", write(tmp_path, bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["field"] == "measure[1]"
    assert err["error"] == "InvalidMeasure"
    assert "atom 1" in err["message"]


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda p: p.pop("measure"), "measure"),
        (lambda p: p.update(extra=1), "problem"),
        (lambda p: p.update(alpha=0.25), "solver"),
        (lambda p: p.update(solver={"max_iters": 3}), "solver"),
        (lambda p: p.update(grid={"scheme": "sparse"}), None),
        (lambda p: p.update(support=[1.0, 2.0]), "support"),
        (lambda p: p.update(measure=[{"angle": 200, "weight": 0.1}]), "measure[0].angle"),
        (lambda p: p.update(measure=[{"direction": [-1, -1], "weight": "x"}]), "measure[0]"),
        (lambda p: p.update(cone={"type": "polyhedral", "generators": [[1, 0], [-1, 0]]}), "cone"),
        (lambda p: p.update(cone={"type": "circular", "axis": [1, 1], "half_angle": 0.5}), "cone"),
        (lambda p: p.update(plan={"stages": [[], [0]]}), "plan"),
        (lambda p: p.update(oracle={"samples": 10}), "oracle"),
    ],
)
def test_validation_errors_exit_2(tmp_path, capsys, mutate, field):
    problem = json.loads(json.dumps(SINGLE))
    mutate(problem)
    assert run(["covolume", write(tmp_path, problem)]) == 2
    err = json.loads(capsys.readouterr().err)
    if field is not None:
        assert err["field"] == field
    assert err["message"]


def test_json_syntax_error_reports_line(tmp_path, capsys):
    assert run(["solve", write(tmp_path, '{\n  "cone": {,\n}')]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "line 2" in err["message"]
    assert run(["solve", str(tmp_path / "missing.json")]) == 2


def test_nonconvergence_exit_3_still_writes(tmp_path):
    problem = dict(THREE, solver={"max_iter": 1})
    code, rep = run_json(tmp_path, ["solve", write(tmp_path, problem)])
    assert code == 3
    assert rep["result"]["status"] == "max_iterations"


def test_check_gradient_on_solved_instance(tmp_path):
    code, rep = run_json(tmp_path, ["check-gradient", write(tmp_path, SINGLE)])
    assert code == 0
    assert rep["max_relative_error"] <= 1e-3
    assert rep["f"][0] == pytest.approx(0.339147172536551, abs=1e-5)
    assert len(rep["table"]) == 1


def test_covolume_surface_oracle_with_support(tmp_path):
    problem = dict(SINGLE, support=[1.0])
    path = write(tmp_path, problem)
    code, rep = run_json(tmp_path, ["covolume", path])
    assert code == 0 and rep["covolume"] == pytest.approx(0.116516235668598, abs=1e-9)
    code, rep = run_json(tmp_path, ["surface", path])
    assert rep["facet"][0] == pytest.approx(0.1651908710340167, abs=1e-15)
    assert rep["max_abs_difference"] <= 1e-8
    code, rep = run_json(tmp_path, ["oracle", path, "--seed", "8"])
    assert code == 0 and abs(rep["z_score"]) <= 3.0
    assert rep["seed"] == 8 and rep["problem"]["oracle"]["seed"] == 8


def test_exhaust_command(tmp_path):
    code, rep = run_json(tmp_path, ["exhaust", write(tmp_path, THREE)])
    assert code == 0
    assert [s["indices"] for s in rep["stages"]] == [[1], [0, 1, 2]]
    assert rep["summary"]["b_within_bound"] and all(rep["summary"]["feasible"])


def test_echoed_problem_round_trips(tmp_path):
    path = write(tmp_path, THREE)
    code, rep = run_json(tmp_path, ["solve", path, "--grid", "4096", "--seed", "2"])
    echoed = rep["problem"]
    assert echoed["grid"] == {"resolution": 4096, "seed": 2}
    again = parse_problem(echoed)
    assert again.to_dict() == echoed
    original = load_problem(path)
    np.testing.assert_array_equal(again.measure.directions, original.measure.directions)
    np.testing.assert_array_equal(again.measure.weights, original.measure.weights)
    assert again.config.grid_resolution == 4096
    # re-running the echoed problem reproduces the report
    code2, rep2 = run_json(tmp_path, ["solve", write(tmp_path, echoed, "echo.json")])
    assert rep2["result"] == rep["result"]


def test_csv_profile(tmp_path):
    target = tmp_path / "profile.csv"
    assert run(["solve", write(tmp_path, THREE), "--grid", "2048", "--csv", str(target), "--out", str(tmp_path / "r.json")]) == 0
    rows = list(csv.reader(target.open()))
    assert rows[0] == ["angle", "rho", "facet"]
    assert len(rows) == 2049
    assert {int(r[2]) for r in rows[1:]} == {0, 1, 2}


def test_problem_error_is_value_error():
    with pytest.raises(ValueError):
        parse_problem({"cone": QUARTER})
    with pytest.raises(ProblemError):
        parse_problem([1, 2])


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "gmc.cli", "covolume", write(tmp_path, dict(SINGLE, support=[1.0]))],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["covolume"] == pytest.approx(0.116516235668598, abs=1e-9)
