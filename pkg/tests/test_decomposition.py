import itertools
import json
import math

import numpy as np
import pytest

from wildfire_psps import decomposition as dec
from wildfire_psps.errors import LimitReached, ParseError
from wildfire_psps.fixtures import random_toy
from wildfire_psps.milp.extensive import solve_extensive
from wildfire_psps.milp.model import Limits
from wildfire_psps.wildfire.scenario import DisruptionScenario


@pytest.fixture(scope="module")
def consistent_anchors(toy_oracle):
    return [a for a in itertools.product([0, 1], repeat=toy_oracle.C) if toy_oracle.consistent(a)]


@pytest.fixture(scope="module")
def toy_cuts(toy, toy_scenarios, toy_oracle, consistent_anchors):
    """Every LC and SMC cut at every consistent anchor, with the exact f table."""
    out = []
    for i, s in enumerate(toy_scenarios):
        if not s.disruptive:
            continue
        so = dec.ScenarioOracle(toy, s, i)
        f = {a: toy_oracle.recourse(s, a) for a in consistent_anchors}
        for a in consistent_anchors:
            lc = dec.lagrangian_cut(so, np.array(a, float))
            smc = dec.smc_cut(so, np.array(a, float))
            out.append((s, a, f, lc, smc))
    return out


def test_every_cut_is_valid_at_every_anchor(toy_cuts, consistent_anchors):
    assert len(consistent_anchors) == 34
    for _, _, f, lc, smc in toy_cuts:
        for z in consistent_anchors:
            assert lc.value(z) <= f[z] + 1e-6
            assert smc.value(z) <= f[z] + 1e-6


def test_lagrangian_cut_is_tight(toy_cuts):
    for _, a, f, lc, _ in toy_cuts:
        assert lc.intercept == pytest.approx(f[a], abs=1e-4)
        assert lc.value(a) == pytest.approx(f[a], abs=1e-4)


def test_square_minimization_cut_meets_target_with_smaller_norm(toy_cuts):
    for _, a, f, lc, smc in toy_cuts:
        assert smc.intercept >= (1 - 1e-4) * f[a] - 1e-9
        assert np.linalg.norm(smc.lam) <= np.linalg.norm(lc.lam) * (1 + 1e-6) + 1e-6


def test_steep_multiplier_reproduces_f_at_anchor():
    anchor = np.array([1, 0, 1, 1])
    lam = dec.steep_cut_multiplier(anchor, 12.0)
    np.testing.assert_allclose(lam, [12, -12, 12, 12])
    # R(anchor, lam) >= f(anchor) since moving any coordinate away costs f
    for z in itertools.product([0, 1], repeat=4):
        if tuple(z) != tuple(anchor):
            assert lam @ (anchor - np.array(z)) >= 12.0


def test_dual_state_keeps_lowest_cost():
    ds = dec.DualState(3)
    assert ds.add([1, 0, 1], 5.0)
    assert not ds.add([1, 0, 1], 6.0)
    assert ds.add([1, 0, 1], 4.0)
    assert len(ds) == 1
    assert ds.upper_model(np.array([1, 1, 1]), np.array([0.0, 2.0, 0.0])) == pytest.approx(6.0)


@pytest.mark.parametrize("mode", dec.CUT_MODES)
def test_run_reaches_enumerated_optimum(toy, toy_scenarios, toy_optimum, mode):
    res = dec.run(toy, toy_scenarios, epsilon=0.0, cut_mode=mode)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(toy_optimum[0], abs=1e-6)
    assert res.lower_bound == pytest.approx(toy_optimum[0], abs=1e-6)
    res.plan.check(toy)


@pytest.mark.parametrize("seed", [1, 2])
def test_bounds_are_monotone(seed):
    case, scenarios = random_toy(seed, n_bus=4, horizon=4, n_scenarios=6)
    res = dec.run(case, scenarios, epsilon=1e-4, cut_mode="smc")
    lb, ub = res.bounds.lb, res.bounds.ub
    assert all(b >= a - 1e-9 for a, b in zip(lb, lb[1:]))
    assert all(b <= a + 1e-9 for a, b in zip(ub, ub[1:]))
    assert all(l <= u + 1e-6 * max(1, abs(u)) for l, u in zip(lb, ub))
    _, ext, _ = solve_extensive(case, scenarios, limits=Limits(gap=1e-9))
    assert res.lower_bound <= ext.objective + 1e-6 * max(1.0, abs(ext.objective))
    assert res.objective >= ext.objective - 1e-6 * max(1.0, abs(ext.objective))


def test_single_quiet_scenario_finishes_in_one_iteration(toy):
    res = dec.run(toy, [DisruptionScenario(None)], epsilon=0.0)
    assert res.iterations == 1 and res.status == "optimal" and not res.cuts
    assert res.objective == pytest.approx(0.0, abs=1e-9)
    assert (res.plan.z == 1).all()


def test_checkpoint_resume_matches_full_run(tmp_path):
    case, scenarios = random_toy(1, n_bus=4, horizon=4, n_scenarios=8)
    full = dec.run(case, scenarios, epsilon=0.0, cut_mode="lc")
    assert full.iterations == 4
    ck = tmp_path / "ck.json"
    part = dec.run(case, scenarios, epsilon=0.0, cut_mode="lc",
                   limits=dec.RunLimits(max_iterations=2), checkpoint=ck)
    assert part.status == "limit" and ck.exists()
    doc = json.loads(ck.read_text())
    assert doc["iteration"] == 2 and len(doc["cuts"]) == len(part.cuts)
    done = dec.run(case, scenarios, epsilon=0.0, cut_mode="lc", checkpoint=ck, resume=True)
    assert done.status == "optimal"
    assert done.objective == pytest.approx(full.objective, abs=1e-6)
    assert done.bounds.records[0].iteration == 1 and done.iterations == full.iterations


def test_checkpoint_for_other_scenarios_rejected(toy, toy_scenarios, tmp_path):
    ck = tmp_path / "ck.json"
    dec.run(toy, toy_scenarios, limits=dec.RunLimits(max_iterations=1), checkpoint=ck)
    with pytest.raises(ParseError):
        dec.run(toy, toy_scenarios[:3] + [toy_scenarios[3].with_probability(0.65)],
                checkpoint=ck, resume=True)


def test_limit_raises_with_incumbent(toy, toy_scenarios):
    with pytest.raises(LimitReached) as exc:
        dec.run(toy, toy_scenarios, epsilon=0.0, limits=dec.RunLimits(max_iterations=1),
                raise_on_limit=True)
    assert exc.value.incumbent.plan is not None


@pytest.mark.parametrize("kw", [{"cut_mode": "xx"}, {"epsilon": -1.0}])
def test_run_rejects_bad_arguments(toy, toy_scenarios, kw):
    with pytest.raises(ValueError):
        dec.run(toy, toy_scenarios, **kw)
    with pytest.raises(ValueError):
        dec.run(toy, [])


def test_iterations_to_gap_and_relative_gap():
    log = dec.BoundsLog([dec.BoundsRecord(1, 0.0, 10.0, "a", 0.0, 0),
                         dec.BoundsRecord(2, 9.0, 10.0, "a", 0.0, 1),
                         dec.BoundsRecord(3, 9.95, 10.0, "a", 0.0, 2)])
    assert dec.iterations_to_gap(log, 0.1) == 2
    assert dec.iterations_to_gap(log, 0.01) == 3
    assert dec.iterations_to_gap(log, 0.001) is None
    assert dec.relative_gap(-math.inf, 3.0) == math.inf
    assert dec.relative_gap(0.0, 0.0) == 0.0


def test_cut_round_trip():
    cut = dec.Cut(2, np.array([1.5, -2.0]), 7.0, np.array([1.0, 0.0]), 3, "smc", 6.9)
    back = dec.Cut.from_dict(json.loads(json.dumps(cut.to_dict())))
    assert back.value([0, 1]) == cut.value([0, 1]) == pytest.approx(7.0 - 1.5 - 2.0)
    assert back.mode == "smc" and back.target == 6.9


def test_master_with_cuts_respects_them(toy, toy_scenarios):
    from wildfire_psps.milp import backends
    s = toy_scenarios[3]  # tau = 1: the cut constrains V alone
    cut = dec.Cut(3, np.zeros(toy.n_components), 500.0, np.ones(toy.n_components))
    h = dec.build_master(toy, toy_scenarios, [cut])
    res = backends.solve(h.model, Limits(gap=1e-9))
    assert res.x[h.V[3]] >= 500.0 - 1e-6
    assert s.tau == 1


def test_time_limit_stops_after_first_round(toy, toy_scenarios):
    res = dec.run(toy, toy_scenarios, epsilon=0.0, limits=dec.RunLimits(time=0.0))
    assert res.status == "limit" and res.iterations == 1
    assert res.plan is not None and not res.cuts


def test_master_start_satisfies_every_row(toy, toy_scenarios):
    from wildfire_psps.milp.dispatch import all_on_plan
    res = dec.run(toy, toy_scenarios, epsilon=0.0, cut_mode="lc")
    h = dec.build_master(toy, toy_scenarios, res.cuts)
    m = h.model
    for plan in (all_on_plan(toy), res.plan):
        x = dec.master_start(h, toy_scenarios, plan, res.cuts)
        assert np.all(x >= np.array(m.lower) - 1e-9) and np.all(x <= np.array(m.upper) + 1e-9)
        for idx, coef, lo, hi in zip(m.row_index, m.row_coef, m.row_lower, m.row_upper):
            v = float(np.dot(coef, x[np.asarray(idx, dtype=int)]))
            assert lo - 1e-6 <= v <= hi + 1e-6
