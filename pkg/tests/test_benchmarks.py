import csv

import numpy as np
import pytest

from wildfire_psps import benchmarks as bm
from wildfire_psps.errors import ValidationError
from wildfire_psps.evaluation import evaluate_plan
from wildfire_psps.milp.model import Limits
from wildfire_psps.wildfire.scenario import DisruptionScenario

EXACT = Limits(gap=1e-9)
ALL_ON = (5,) * 7


@pytest.fixture(scope="module")
def det(toy):
    return bm.solve_deterministic(toy, EXACT)


@pytest.fixture(scope="module")
def ws(toy, toy_scenarios):
    return bm.solve_wait_and_see(toy, toy_scenarios, EXACT)


def test_deterministic_plan_keeps_everything_on(toy, det):
    assert det.objective == pytest.approx(0.0, abs=1e-9)
    assert (det.plan.z == 1).all()


def test_wait_and_see_matches_enumeration(toy_oracle, toy_scenarios, ws):
    for s, v in zip(toy_scenarios, ws.values):
        assert v == pytest.approx(toy_oracle.best_plan([s.with_probability(1.0)])[0], abs=1e-6)
    assert ws.g_star == pytest.approx(sum(s.probability * v for s, v in zip(toy_scenarios, ws.values)))
    assert ws.g_star == pytest.approx(932.086, abs=1e-3)


def test_benchmark_ordering(toy, toy_oracle, toy_scenarios, toy_optimum, det, ws):
    g_det = evaluate_plan(toy, det.plan, toy_scenarios).g_n
    assert g_det == pytest.approx(toy_oracle.expected_cost(ALL_ON, toy_scenarios), abs=1e-6)
    assert ws.g_star <= toy_optimum[0] + 1e-6 <= g_det + 2e-6


def test_risk_table_mean_fire_set_size(toy, toy_scenarios):
    risk = bm.compute_risk_table(toy, toy_scenarios)
    per_c = np.zeros(toy.n_components)
    for s in toy_scenarios:
        for c in s.u:
            per_c[c] += len(s.fire_sets[c]) / len(toy_scenarios)
    np.testing.assert_allclose(risk.R[:, 0], per_c)
    assert risk.R.shape == (toy.n_components, toy.horizon)
    assert risk.R_total == pytest.approx(per_c.sum() * toy.horizon)
    assert risk.D_total == pytest.approx(toy.demand_matrix().sum())


def test_risk_based_endpoints(toy, toy_scenarios, det):
    risk = bm.compute_risk_table(toy, toy_scenarios)
    zero = bm.solve_risk_based(toy, risk, 0.0, EXACT)
    assert zero.extra["shed"] == pytest.approx(det.objective, abs=1e-6)
    full = bm.solve_risk_based(toy, risk, 1.0, EXACT)
    risky = np.flatnonzero(risk.R[:, 0] > 0)
    assert (full.plan.z[risky, 1:] == 0).all()


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_risk_based_rejects_bad_alpha(toy, toy_scenarios, alpha):
    with pytest.raises(ValidationError):
        bm.solve_risk_based(toy, bm.compute_risk_table(toy, toy_scenarios), alpha)


def test_risk_based_needs_some_risk(toy):
    empty = bm.compute_risk_table(toy, [DisruptionScenario(None)])
    with pytest.raises(ValidationError):
        bm.solve_risk_based(toy, empty, 0.5)
    assert bm.solve_risk_based(toy, empty, 0.0).plan is not None


def test_robust_plan_minimizes_worst_case(toy, toy_scenarios, toy_optimum, det, ws):
    ro = bm.solve_robust(toy, toy_scenarios, limits=EXACT, ws_values=ws.values)
    assert ro.objective == pytest.approx(2216.9555555555557, abs=1e-6)
    assert ro.extra["subset"][0] == int(np.argmax(ws.values))
    from oracles import ToyOracle
    oracle = ToyOracle(toy)
    assert ro.objective <= oracle.worst_case(toy_optimum[1], toy_scenarios) + 1e-6
    assert ro.objective <= oracle.worst_case(ALL_ON, toy_scenarios) + 1e-6
    assert evaluate_plan(toy, ro.plan, toy_scenarios).worst_case == pytest.approx(ro.objective)


def test_alpha_sweep_rows_and_csv(toy, toy_scenarios, tmp_path, ws):
    risk = bm.compute_risk_table(toy, toy_scenarios)
    rows = bm.alpha_sweep(toy, risk, [0.0, 0.5, 1.0], toy_scenarios, reference_g=ws.g_star)
    assert [a for a, _, _ in rows] == [0.0, 0.5, 1.0]
    for _, _, rep in rows:
        assert rep.g_n >= ws.g_star - 1e-6
        assert rep.rri() >= -1e-9
    path = tmp_path / "sweep.csv"
    bm.write_sweep_csv(path, rows)
    with open(path) as fh:
        got = list(csv.DictReader(fh))
    assert [r["alpha"] for r in got] == ["0.0", "0.5", "1.0"]


def test_wait_and_see_needs_scenarios(toy):
    with pytest.raises(ValidationError):
        bm.solve_wait_and_see(toy, [])
    with pytest.raises(ValidationError):
        bm.solve_robust(toy, [])
