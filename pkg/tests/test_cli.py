import csv
import json

import numpy as np
import pytest

from wildfire_psps import cli
from wildfire_psps.case_model import case_hash
from wildfire_psps.fixtures import load_fixture
from wildfire_psps.milp.blocks import ShutoffPlan
from wildfire_psps.wildfire.scenario import write_scenarios


@pytest.fixture
def toy_file(tmp_path, toy, toy_scenarios):
    path = tmp_path / "toy.jsonl"
    write_scenarios(path, toy, toy_scenarios, {"case_hash": case_hash(toy), "seed": 0})
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_simulate_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("simulate", "--case", "toy3", "--n", 25, "--seed", 7, "--out", tmp_path / d,
                   "--threads", 1 if d == "a" else 3) == 0
    a = (tmp_path / "a" / "scenarios.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "scenarios.jsonl").read_bytes()
    assert len(a.splitlines()) == 26
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert "scenarios.jsonl" in manifest["runs"][0]["files"]


def test_simulate_rejects_zero_scenarios(tmp_path):
    assert run("simulate", "--case", "toy3", "--n", 0, "--out", tmp_path) == cli.EXIT_VALIDATION


def test_missing_case_file_is_io_error(tmp_path):
    assert run("simulate", "--case", tmp_path / "nope.json", "--n", 2, "--out", tmp_path) == cli.EXIT_IO


def test_unknown_flag_is_usage_error(tmp_path):
    assert run("solve", "--bogus") == cli.EXIT_VALIDATION
    assert run("simulate", "--case", "toy3", "--n", 1, "--threads", 0, "--out", tmp_path) == 2


def test_solve_exact_matches_enumeration(tmp_path, toy_file, toy_optimum):
    objectives = {}
    for cut in ("smc", "lc"):
        out = tmp_path / cut
        assert run("solve", "--case", "toy3", "--scenarios", toy_file, "--epsilon", 0, "--cut", cut,
                   "--out", out, "--threads", 1) == 0
        doc = json.loads((out / "plan.json").read_text())
        assert doc["status"] == "optimal" and doc["gap"] <= 1e-9
        objectives[cut] = doc["objective"]
        with open(out / "bounds.csv") as fh:
            assert len(list(csv.DictReader(fh))) == doc["iterations"]
    assert objectives["smc"] == pytest.approx(toy_optimum[0], abs=1e-6)
    assert objectives["lc"] == pytest.approx(toy_optimum[0], abs=1e-6)


def test_solve_extensive(tmp_path, toy_file, toy_optimum):
    assert run("solve", "--case", "toy3", "--scenarios", toy_file, "--extensive", "--epsilon", 1e-9,
               "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "plan.json").read_text())
    assert doc["objective"] == pytest.approx(toy_optimum[0], abs=1e-6)


def test_solve_iteration_cap_exits_solver_code_with_incumbent(tmp_path, toy_file):
    assert run("solve", "--case", "toy3", "--scenarios", toy_file, "--epsilon", 0,
               "--max-iterations", 1, "--out", tmp_path) == cli.EXIT_SOLVER
    assert (tmp_path / "plan.json").exists()


def test_case_hash_mismatch_is_rejected(tmp_path, capsys):
    case = load_fixture("socal73")
    path = tmp_path / "socal.jsonl"
    write_scenarios(path, case, [], {"case_hash": case_hash(case)})
    assert run("solve", "--case", "toy3", "--scenarios", path, "--out", tmp_path) == 2
    assert "case hash" in capsys.readouterr().err


def test_missing_scenarios_file(tmp_path):
    assert run("solve", "--case", "toy3", "--scenarios", tmp_path / "x.jsonl", "--out", tmp_path) == 3


def test_evaluate_and_benchmark(tmp_path, toy_file):
    assert run("solve", "--case", "toy3", "--scenarios", toy_file, "--epsilon", 0, "--out", tmp_path) == 0
    plan = tmp_path / "plan.json"
    assert run("evaluate", "--case", "toy3", "--plan", plan, "--reference", plan,
               "--scenarios", toy_file, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "evaluation.json").read_text())["reports"][0]
    assert rep["rri"] == pytest.approx(0.0, abs=1e-12)
    assert run("benchmark", "--case", "toy3", "--scenarios", toy_file, "--plan", plan,
               "--out", tmp_path) == 0
    with open(tmp_path / "alpha_sweep.csv") as fh:
        sweep = list(csv.DictReader(fh))
    assert [r["alpha"] for r in sweep] == [f"{a / 10:.1f}" for a in range(10)]
    bench = json.loads((tmp_path / "benchmark.json").read_text())
    assert not bench["failures"]
    rows = {r["plan"]: r for r in bench["reports"]}
    assert rows["X_det"]["rri"] > 0
    assert all(bench["ws_g_star"] <= r["g_n"] + 1e-6 for r in bench["reports"])
    assert run("plot", "--report", tmp_path / "benchmark.json", "--out", tmp_path) == 0
    assert (tmp_path / "cost_scatter.svg").exists()


def test_plan_for_other_case_rejected(tmp_path, toy_file):
    case = load_fixture("socal73")
    T = case.horizon
    plan = ShutoffPlan(np.ones((case.n_components, T + 1), int), np.ones((case.n_load, T)),
                       np.zeros((case.n_bus, T)), np.zeros((case.n_line, T)), np.zeros((case.n_gen, T)))
    plan.save(tmp_path / "p.json", {"case_hash": case_hash(case)})
    assert run("evaluate", "--case", "toy3", "--plan", tmp_path / "p.json", "--scenarios", toy_file,
               "--out", tmp_path) == 2


def test_plot_missing_or_empty_inputs(tmp_path):
    assert run("plot", "--out", tmp_path) == cli.EXIT_IO
    assert run("plot", "--saa", tmp_path / "none.json", "--out", tmp_path) == cli.EXIT_IO
    (tmp_path / "empty.json").write_text(json.dumps({"reports": []}))
    assert run("plot", "--report", tmp_path / "empty.json", "--out", tmp_path) == cli.EXIT_IO
    (tmp_path / "saa.json").write_text(json.dumps({"table": []}))
    assert run("plot", "--saa", tmp_path / "saa.json", "--out", tmp_path) == cli.EXIT_IO


def test_plot_network_snapshot(tmp_path, toy):
    T = toy.horizon
    z = np.ones((toy.n_components, T + 1), int)
    z[5:7, 3:] = 0  # both lines off from period 3
    plan = ShutoffPlan(z, np.ones((toy.n_load, T)), np.zeros((toy.n_bus, T)),
                       np.zeros((toy.n_line, T)), np.zeros((toy.n_gen, T)))
    plan.save(tmp_path / "p.json", {"case_hash": case_hash(toy)})
    assert run("plot", "--case", "toy3", "--plan", tmp_path / "p.json", "--period", 2,
               "--period", 3, "--out", tmp_path) == 0
    svg = (tmp_path / "network_t3.svg").read_text()
    assert svg.count("stroke-dasharray") >= 2
    assert run("plot", "--case", "toy3", "--plan", tmp_path / "p.json", "--period", 9,
               "--out", tmp_path) == 2


def test_sensitivity_and_interact(tmp_path, toy_file):
    assert run("sensitivity", "--case", "toy3", "--scenarios", toy_file, "--dp", "0,0.9",
               "--epsilon", 0, "--out", tmp_path) == 0
    with open(tmp_path / "sensitivity.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[1]["objective"]) == pytest.approx(0.0, abs=1e-6)
    assert run("interact", "--case", "toy3", "--n", 4, "--eval-n", 6, "--seed", 1,
               "--out", tmp_path) == 0
    assert (tmp_path / "plan_exo.json").exists()


def test_saa_via_cli(tmp_path):
    assert run("evaluate", "--case", "toy3", "--saa", "2,3", "--replicates", 2, "--eval-n", 6,
               "--seed", 4, "--out", tmp_path) == 0
    table = json.loads((tmp_path / "saa.json").read_text())["table"]
    assert [r["size"] for r in table] == [2, 3]
    assert run("plot", "--saa", tmp_path / "saa.json", "--out", tmp_path) == 0


def test_config_hash_ignores_threads_and_output():
    p = cli.build_parser()
    a = p.parse_args(["simulate", "--case", "toy3", "--n", "3", "--threads", "1", "--out", "x"])
    b = p.parse_args(["simulate", "--case", "toy3", "--n", "3", "--threads", "8", "--out", "y"])
    c = p.parse_args(["simulate", "--case", "toy3", "--n", "4"])
    assert cli.config_hash(a) == cli.config_hash(b) != cli.config_hash(c)
