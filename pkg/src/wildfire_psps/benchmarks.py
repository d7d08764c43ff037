"""Comparison models: deterministic, wait-and-see, risk-based and robust plans."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .case_model import PowerCase
from .errors import IterationLimit, SolverError, ValidationError
from .evaluation import PlanEvaluator, evaluate_plan
from .milp import backends
from .milp.blocks import ShutoffPlan, build_first_stage, extract_plan, plan_hint, shed_terms
from .milp.dispatch import all_on_plan, polish_dispatch
from .milp.extensive import EXTENSIVE_LIMITS, solve_extensive
from .milp.model import Limits, LinearModel


@dataclass
class BenchmarkResult:
    tag: str
    plan: ShutoffPlan | None
    objective: float
    solve_time: float
    plans: list = field(default_factory=list)
    values: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def g_star(self) -> float:
        """Probability-weighted wait-and-see value (ws results only)."""
        return self.extra.get("g_star", math.nan)


def _first_stage_solve(case: PowerCase, objective, limits: Limits, backend):
    m = LinearModel(name="first_stage")
    fs = build_first_stage(m, case)
    terms, const = objective(fs)
    m.set_objective(terms, const)
    m.hints = plan_hint(fs, all_on_plan(case))
    res = backends.solve(m, limits, backend)
    if not res.ok or res.x is None:
        raise SolverError(f"first-stage model ended with status {res.status.value}")
    return extract_plan(case, fs, res.x), res


def solve_deterministic(case: PowerCase, limits: Limits | None = None,
                        backend: str | None = None) -> BenchmarkResult:
    """Serve as much weighted load as possible with no regard to fire."""
    t0 = time.perf_counter()

    def objective(fs):
        terms, const = [], 0.0
        for t in range(1, case.horizon + 1):
            tt, cc = shed_terms(case, fs.period[t])
            terms += tt
            const += cc
        return terms, const

    plan, res = _first_stage_solve(case, objective, limits or Limits(gap=1e-6), backend)
    return BenchmarkResult("det", plan, res.objective, time.perf_counter() - t0)


def solve_wait_and_see(case: PowerCase, scenarios, limits: Limits | None = None,
                       backend: str | None = None, threads: int = 1) -> BenchmarkResult:
    """Per-scenario optimum with the disruption known in advance."""
    scenarios = list(scenarios)
    if not scenarios:
        raise ValidationError("wait-and-see needs scenarios", field="scenarios")
    t0 = time.perf_counter()
    limits = limits or EXTENSIVE_LIMITS

    def one(s):
        plan, res, _ = solve_extensive(case, [s.with_probability(1.0)], "expectation", limits,
                                       backend)
        return plan, res.objective

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(one, scenarios))
    else:
        out = [one(s) for s in scenarios]
    values = [v for _, v in out]
    g_star = float(sum(s.probability * v for s, v in zip(scenarios, values)))
    return BenchmarkResult("ws", None, g_star, time.perf_counter() - t0,
                           plans=[p for p, _ in out], values=values, extra={"g_star": g_star})


@dataclass
class RiskTable:
    """``R[c, t-1]``: mean size of the fire set started by a fault at c."""

    R: np.ndarray
    D_total: float

    @property
    def R_total(self) -> float:
        return float(self.R.sum())


def compute_risk_table(case: PowerCase, scenarios) -> RiskTable:
    scenarios = list(scenarios)
    C, T = case.n_components, case.horizon
    per_c = np.zeros(C)
    for s in scenarios:
        for c in s.u:
            per_c[c] += len(s.fire_sets[c])
    if scenarios:
        per_c /= len(scenarios)
    return RiskTable(np.repeat(per_c[:, None], T, axis=1), float(case.demand_matrix().sum()))


def solve_risk_based(case: PowerCase, risk: RiskTable, alpha: float, limits: Limits | None = None,
                     backend: str | None = None) -> BenchmarkResult:
    """Trade normalized fire risk of energized components against normalized served load."""
    if not 0 <= alpha <= 1:
        raise ValidationError("alpha must lie in [0, 1]", field="alpha")
    if alpha > 0 and risk.R_total <= 0:
        raise ValidationError("risk table is all zero", field="risk")
    t0 = time.perf_counter()
    w = case.priorities()
    D = case.demand_matrix()
    d_tot = risk.D_total or 1.0

    def objective(fs):
        terms = []
        for t in range(1, case.horizon + 1):
            if alpha > 0:
                terms += [(fs.z[t][c], alpha * risk.R[c, t - 1] / risk.R_total)
                          for c in range(case.n_components) if risk.R[c, t - 1]]
            if alpha < 1:
                terms += [(fs.period[t].x[d], -(1 - alpha) * w[d] * D[d, t - 1] / d_tot)
                          for d in range(case.n_load) if D[d, t - 1]]
        return terms, 0.0

    plan, res = _first_stage_solve(case, objective, limits or Limits(gap=1e-6), backend)
    plan = polish_dispatch(case, plan)
    return BenchmarkResult(f"rb({alpha:g})", plan, res.objective, time.perf_counter() - t0,
                           extra={"alpha": alpha, "shed": plan.shed(case, case.horizon)})


def solve_robust(case: PowerCase, scenarios, epsilon_ro: float = 1e-6, limits: Limits | None = None,
                 backend: str | None = None, max_iterations: int = 100, seed_index: int | None = None,
                 ws_values=None, threads: int = 1) -> BenchmarkResult:
    """Worst-case plan by scenario appending.

    Starts from the scenario with the largest standalone wait-and-see cost,
    solves the epigraph model over the current subset, and appends the
    scenario that is worst for the resulting plan until that scenario is
    already covered.
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ValidationError("robust model needs scenarios", field="scenarios")
    t0 = time.perf_counter()
    limits = limits or EXTENSIVE_LIMITS
    if seed_index is None:
        if ws_values is None:
            ws_values = solve_wait_and_see(case, scenarios, limits, backend, threads).values
        seed_index = int(np.argmax(ws_values))
    subset = [seed_index]
    evaluator = PlanEvaluator(case, backend)
    for it in range(1, max_iterations + 1):
        plan, res, _ = solve_extensive(case, [scenarios[i] for i in subset],
                                       "epigraph_worst_case", limits, backend)
        plan = polish_dispatch(case, plan)
        rep = evaluate_plan(case, plan, scenarios, evaluator=evaluator, threads=threads)
        costs = rep.cost
        worst = int(np.argmax(costs))
        bound = res.bound
        if worst in subset or costs[worst] <= res.objective + epsilon_ro * max(1.0, abs(res.objective)):
            return BenchmarkResult("ro", plan, float(costs[worst]), time.perf_counter() - t0,
                                   extra={"subset": subset, "iterations": it,
                                          "epigraph": res.objective, "bound": bound,
                                          "certificate_gap": float(costs[worst] - bound)})
        subset.append(worst)
    raise IterationLimit("scenario appending did not settle",
                         incumbent=BenchmarkResult("ro", plan, float(costs[worst]),
                                                   time.perf_counter() - t0,
                                                   extra={"subset": subset}),
                         gap=float(costs[worst] - bound))


def alpha_sweep(case: PowerCase, risk: RiskTable, alphas, test_scenarios, reference_g=None,
                limits: Limits | None = None, backend: str | None = None, threads: int = 1):
    """One evaluation report per alpha (the risk-based rows of the comparison table)."""
    evaluator = PlanEvaluator(case, backend)
    rows = []
    for a in alphas:
        res = solve_risk_based(case, risk, a, limits, backend)
        rep = evaluate_plan(case, res.plan, test_scenarios, tag=f"{a:.1f}", evaluator=evaluator,
                            threads=threads, reference_g=reference_g)
        rows.append((a, res, rep))
    return rows


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "nondisruptive_shed", "disruptive_shed", "damage", "g_n", "rri"])
        for a, _, rep in rows:
            w.writerow([f"{a:.1f}", rep.nondisruptive_shed, rep.disruptive_shed,
                        rep.disruptive_damage, rep.g_n, rep.rri()])
