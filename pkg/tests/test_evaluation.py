import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from wildfire_psps import evaluation as ev
from wildfire_psps.decomposition import run
from wildfire_psps.errors import ValidationError
from wildfire_psps.fixtures import toy3_case
from wildfire_psps.geo_grid import build_grid
from wildfire_psps.wildfire.env import build_env
from wildfire_psps.wildfire.scenario import DisruptionScenario
from wildfire_psps.wildfire.simulate import Simulator


@pytest.fixture(scope="module")
def optimum_plan(toy, toy_scenarios):
    return run(toy, toy_scenarios, epsilon=0.0).plan


def test_evaluation_reproduces_enumerated_cost(toy, toy_oracle, toy_scenarios, toy_optimum,
                                               optimum_plan):
    rep = ev.evaluate_plan(toy, optimum_plan, toy_scenarios)
    assert rep.g_n == pytest.approx(toy_optimum[0], abs=1e-6)
    for s, c in zip(toy_scenarios, rep.cost):
        assert c == pytest.approx(toy_oracle.expected_cost(toy_optimum[1], [s.with_probability(1.0)]),
                                  abs=1e-6)


def test_report_parts_add_up(toy, toy_scenarios, optimum_plan):
    rep = ev.evaluate_plan(toy, optimum_plan, toy_scenarios, reference_g=900.0, threads=3)
    assert rep.nondisruptive_shed + rep.disruptive_shed + rep.disruptive_damage == pytest.approx(rep.g_n)
    assert rep.rri() == pytest.approx((rep.g_n - 900.0) / 900.0)
    assert math.isnan(ev.evaluate_plan(toy, optimum_plan, toy_scenarios).rri())
    d = rep.to_dict()
    assert len(d["per_scenario"]["pre"]) == len(toy_scenarios)
    assert d["worst_case"] == pytest.approx(rep.cost.max())


def test_quiet_scenario_costs_only_shed(toy, optimum_plan):
    rep = ev.evaluate_plan(toy, optimum_plan, [DisruptionScenario(None)])
    assert rep.post[0] == 0.0 and rep.damage[0] == 0.0
    assert rep.pre[0] == pytest.approx(optimum_plan.shed(toy, toy.horizon))


def test_evaluation_needs_scenarios(toy, optimum_plan):
    with pytest.raises(ValidationError):
        ev.evaluate_plan(toy, optimum_plan, [])


def test_evaluator_memoizes(toy, toy_scenarios, optimum_plan):
    pe = ev.PlanEvaluator(toy)
    a = ev.evaluate_plan(toy, optimum_plan, toy_scenarios, evaluator=pe)
    n = len(pe._values)
    b = ev.evaluate_plan(toy, optimum_plan, toy_scenarios, evaluator=pe)
    assert len(pe._values) == n and np.array_equal(a.cost, b.cost)


def test_t_interval_against_scipy():
    mean, half = ev.t_interval([1.0, 2.0, 3.0])
    lo, hi = stats.t.interval(0.95, 2, loc=2.0, scale=stats.sem([1.0, 2.0, 3.0]))
    assert mean == 2.0 and half == pytest.approx((hi - lo) / 2)
    assert ev.t_interval([4.0])[1] == math.inf


def test_merge_quiet(toy_scenarios):
    extra = DisruptionScenario(None, probability=0.05)
    merged = ev.merge_quiet(list(toy_scenarios) + [extra])
    assert merged[0].tau is None and merged[0].probability == pytest.approx(0.15)
    assert len(merged) == len(toy_scenarios)
    assert ev.merge_quiet(toy_scenarios[1:])[0].probability == 0.0


@given(dp=st.floats(-0.1, 0.9))
def test_reweight_keeps_mass_and_ratios(dp):
    base = [DisruptionScenario(None, probability=0.1)] + \
           [DisruptionScenario(t, v={0}, probability=p) for t, p in ((1, 0.3), (2, 0.6))]
    out = ev.reweight(base, dp)
    assert sum(s.probability for s in out) == pytest.approx(1.0)
    assert out[0].probability == pytest.approx(0.1 + dp)
    if dp < 0.9 - 1e-9:
        assert out[2].probability / out[1].probability == pytest.approx(2.0)


def test_reweight_identity_and_limits(toy_scenarios):
    same = ev.reweight(toy_scenarios, 0.0)
    assert [s.probability for s in same] == pytest.approx([s.probability for s in toy_scenarios])
    top = ev.reweight(toy_scenarios, 0.9)
    assert top[0].probability == pytest.approx(1.0) and all(s.probability == 0 for s in top[1:])
    with pytest.raises(ValidationError):
        ev.reweight(toy_scenarios, 0.95)
    with pytest.raises(ValidationError):
        ev.reweight(toy_scenarios, -0.2)


def test_reweight_uniform_sample_stays_uniform():
    base = [DisruptionScenario(None, probability=0.25)] + \
           [DisruptionScenario(k, v={0}, probability=0.25) for k in (1, 2, 3)]
    out = ev.reweight(base, 0.4)
    assert [s.probability for s in out[1:]] == pytest.approx([0.35 / 3] * 3)


def test_sensitivity_endpoints(toy, toy_scenarios, toy_optimum, tmp_path):
    rows = ev.sensitivity_dp(toy, toy_scenarios, [0.0, 0.9], toy_scenarios, epsilon=0.0)
    assert rows[0].objective == pytest.approx(toy_optimum[0], abs=1e-6)
    assert rows[1].objective == pytest.approx(0.0, abs=1e-6)
    assert rows[1].p_quiet == pytest.approx(1.0)
    ev.sensitivity_csv(tmp_path / "s.csv", rows)
    assert (tmp_path / "s.csv").read_text().count("\n") == 3


@pytest.fixture(scope="module")
def toy_sim():
    case = toy3_case()
    geom, maps = build_grid(case)
    return Simulator(case, geom, maps, build_env(case, geom))


def test_saa_study_structure(toy, toy_sim, tmp_path):
    study = ev.saa_study(toy, [2, 4], replicates=2, eval_n=12, seed=3, simulator=toy_sim)
    table = study.table()
    assert [r["size"] for r in table] == [2, 4]
    assert all(r["replicates"] == 2 and r["failed"] == 0 for r in table)
    assert study.best_plan() is not None
    study.to_csv(tmp_path / "saa.csv")
    assert (tmp_path / "saa.csv").read_text().startswith("size,")
    with pytest.raises(ValidationError):
        ev.saa_study(toy, [2], replicates=1, eval_n=3, seed=0, simulator=toy_sim)
    with pytest.raises(ValidationError):
        ev.saa_study(toy, [], replicates=2, eval_n=3, seed=0, simulator=toy_sim)


def test_saa_samples_are_nested_prefixes(toy_sim):
    pool = toy_sim.generate(8, 5, start=0)
    small = toy_sim.generate(4, 5, start=0)
    assert [s.signature() for s in small] == [s.signature() for s in pool[:4]]


def test_interaction_exogenous_damage_is_plan_independent(toy):
    study = ev.interaction_study(toy, n=6, seed=2, eval_n=15)
    damages = {round(study.reports[(tag, "exo")].disruptive_damage, 6) for tag in study.plans}
    assert len(damages) == 1
    assert len(study.table()) == 9
    assert {r["plan"] for r in study.table()} == {"X_exo", "X_end", "X_mix"}
