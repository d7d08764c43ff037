"""Out-of-sample plan evaluation and the studies built on it."""

from __future__ import annotations

import csv
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .case_model import PowerCase
from .errors import PspsError, ValidationError
from .milp.blocks import ShutoffPlan
from .milp.second_stage import SUBPROBLEM_LIMITS, SecondStageModel
from .wildfire.scenario import DisruptionScenario


class PlanEvaluator:
    """Per-scenario plan cost with recourse values memoized by (scenario content, state)."""

    def __init__(self, case: PowerCase, backend: str | None = None, limits=None):
        self.case = case
        self.backend = backend
        self.limits = limits or SUBPROBLEM_LIMITS
        self._models: dict = {}
        self._values: dict = {}
        self._lock = threading.Lock()

    def _model(self, s: DisruptionScenario) -> SecondStageModel:
        key = s.signature()
        with self._lock:
            model = self._models.get(key)
        if model is None:
            model = SecondStageModel(self.case, s, self.backend, self.limits)
            with self._lock:
                model = self._models.setdefault(key, model)
        return model

    def recourse(self, s: DisruptionScenario, anchor) -> tuple[float, float]:
        """``(shed, damage)`` parts of f at the state ``anchor``."""
        if not s.disruptive:
            return 0.0, 0.0
        anchor = np.rint(np.asarray(anchor, dtype=float))
        key = (s.signature(), anchor.astype(np.int8).tobytes())
        with self._lock:
            hit = self._values.get(key)
        if hit is not None:
            return hit
        model = self._model(s)
        out = model.value(anchor)
        # the split between shed and damage is taken from the solution; the sum is f
        value = (out.objective - out.damage, out.damage)
        with self._lock:
            self._values[key] = value
        return value

    def scenario_cost(self, plan: ShutoffPlan, s: DisruptionScenario) -> tuple[float, float, float]:
        """``(pre-disruption shed, post-disruption shed, damage)``."""
        T = self.case.horizon
        pre = plan.shed(self.case, s.tau_index(T) - 1)
        if not s.disruptive:
            return pre, 0.0, 0.0
        post, damage = self.recourse(s, plan.anchor(s.tau))
        return pre, post, damage


@dataclass
class EvaluationReport:
    tag: str
    probability: np.ndarray
    disruptive: np.ndarray
    pre: np.ndarray
    post: np.ndarray
    damage: np.ndarray
    reference_g: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def cost(self) -> np.ndarray:
        return self.pre + self.post + self.damage

    @property
    def g_n(self) -> float:
        return float(self.probability @ self.cost)

    @property
    def nondisruptive_shed(self) -> float:
        mask = ~self.disruptive
        return float(self.probability[mask] @ self.pre[mask])

    @property
    def disruptive_shed(self) -> float:
        mask = self.disruptive
        return float(self.probability[mask] @ (self.pre[mask] + self.post[mask]))

    @property
    def disruptive_damage(self) -> float:
        mask = self.disruptive
        return float(self.probability[mask] @ self.damage[mask])

    @property
    def worst_case(self) -> float:
        return float(self.cost.max()) if len(self.cost) else 0.0

    def rri(self, reference: float | None = None) -> float:
        ref = self.reference_g if reference is None else reference
        if ref is None or ref == 0:
            return math.nan
        return (self.g_n - ref) / ref

    def row(self) -> dict:
        return {"plan": self.tag, "nondisruptive_shed": self.nondisruptive_shed,
                "disruptive_shed": self.disruptive_shed, "damage": self.disruptive_damage,
                "g_n": self.g_n, "worst_case": self.worst_case, "rri": self.rri()}

    def to_dict(self) -> dict:
        out = self.row()
        out["per_scenario"] = {"pre": self.pre.tolist(), "post": self.post.tolist(),
                               "damage": self.damage.tolist(), "p": self.probability.tolist()}
        return out


def evaluate_plan(case: PowerCase, plan: ShutoffPlan, scenarios, tag: str = "plan",
                  evaluator: PlanEvaluator | None = None, threads: int = 1,
                  reference_g: float | None = None) -> EvaluationReport:
    """Cost of running ``plan`` until disruption and reacting optimally afterwards."""
    scenarios = list(scenarios)
    if not scenarios:
        raise ValidationError("evaluation needs at least one test scenario", field="scenarios")
    ev = evaluator or PlanEvaluator(case)

    def one(s):
        return ev.scenario_cost(plan, s)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(one, scenarios))
    else:
        parts = [one(s) for s in scenarios]
    arr = np.array(parts, dtype=float).reshape(-1, 3)
    return EvaluationReport(tag=tag, probability=np.array([s.probability for s in scenarios]),
                            disruptive=np.array([s.disruptive for s in scenarios]),
                            pre=arr[:, 0], post=arr[:, 1], damage=arr[:, 2],
                            reference_g=reference_g)


def write_reports_csv(path, reports) -> None:
    rows = [r.row() for r in reports]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


# -- SAA study ----------------------------------------------------------------------

def t_interval(values, level: float = 0.95) -> tuple[float, float]:
    """Mean and Student-t half-width over replicate values."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return float(v.mean()) if len(v) else math.nan, math.inf
    half = stats.t.ppf(0.5 + level / 2, len(v) - 1) * v.std(ddof=1) / math.sqrt(len(v))
    return float(v.mean()), float(half)


@dataclass
class SaaCell:
    size: int
    lb: list
    ub: list
    plans: list = field(default_factory=list)
    failed: int = 0

    def summary(self) -> dict:
        lb_mean, lb_half = t_interval(self.lb)
        ub_mean, ub_half = t_interval(self.ub)
        gaps = np.array(self.ub) - np.array(self.lb)
        return {"size": self.size, "replicates": len(self.lb), "failed": self.failed,
                "lb_mean": lb_mean, "lb_ci": lb_half, "ub_mean": ub_mean, "ub_ci": ub_half,
                "gap_mean": float(gaps.mean()) if len(gaps) else math.nan,
                "lb_min": min(self.lb, default=math.nan), "lb_max": max(self.lb, default=math.nan),
                "ub_min": min(self.ub, default=math.nan), "ub_max": max(self.ub, default=math.nan)}


@dataclass
class SaaStudy:
    sizes: list
    replicates: int
    cells: dict

    def table(self) -> list:
        return [self.cells[n].summary() for n in self.sizes]

    def best_plan(self):
        """Replicate plan with the lowest evaluated cost over all cells."""
        best = None
        for cell in self.cells.values():
            for ub, plan in zip(cell.ub, cell.plans):
                if best is None or ub < best[0]:
                    best = (ub, plan)
        return None if best is None else best[1]

    def to_csv(self, path) -> None:
        rows = self.table()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


def saa_study(case: PowerCase, sizes, replicates: int, eval_n: int, seed: int, simulator=None,
              epsilon: float = 1e-4, cut_mode: str = "smc", threads: int = 1,
              eval_scenarios=None, backend: str | None = None) -> SaaStudy:
    """LB/UB replicates per sample size.

    Replicate r draws scenario streams ``r * max(sizes) + i`` so the sample
    of size n is a prefix of the larger samples of the same replicate
    (paired across sizes); the evaluation set uses a disjoint stream range.
    """
    from . import decomposition
    from .wildfire.simulate import Simulator
    from .geo_grid import build_grid
    from .wildfire.env import build_env

    sizes = sorted(int(n) for n in sizes)
    if not sizes:
        raise ValidationError("sizes must be nonempty", field="sizes")
    if replicates < 2:
        raise ValidationError("at least two replicates are needed", field="replicates")
    if simulator is None:
        geom, maps = build_grid(case)
        simulator = Simulator(case, geom, maps, build_env(case, geom))
    n_max = sizes[-1]
    if eval_scenarios is None:
        eval_scenarios = simulator.generate(eval_n, seed, start=replicates * n_max)
    evaluator = PlanEvaluator(case, backend)
    pools = [simulator.generate(n_max, seed, start=r * n_max) for r in range(replicates)]
    cells = {}
    for n in sizes:
        cell = SaaCell(n, [], [])
        for r in range(replicates):
            sample = [s.with_probability(1.0 / n) for s in pools[r][:n]]
            try:
                res = decomposition.run(case, sample, epsilon=epsilon, cut_mode=cut_mode,
                                        threads=threads, backend=backend)
                rep = evaluate_plan(case, res.plan, eval_scenarios, evaluator=evaluator,
                                    threads=threads)
            except PspsError:
                cell.failed += 1
                continue
            cell.lb.append(res.lower_bound)
            cell.ub.append(rep.g_n)
            cell.plans.append(res.plan)
        cells[n] = cell
    return SaaStudy(sizes, replicates, cells)


# -- sensitivity to the no-disruption probability ----------------------------------------

def merge_quiet(scenarios) -> list:
    """Collapse all scenarios without disruption into one, keeping total probability."""
    quiet = [s for s in scenarios if not s.disruptive]
    rest = [s for s in scenarios if s.disruptive]
    if not quiet:
        return [DisruptionScenario(None, probability=0.0)] + rest
    return [DisruptionScenario(None, probability=sum(s.probability for s in quiet))] + rest


def reweight(scenarios, dp: float) -> list:
    """Add ``dp`` to the quiet scenario and rescale the others to keep total mass one.

    Disruptive scenarios keep their relative weights, so equally weighted
    samples stay equally weighted and ``dp = 0`` returns the input weights.
    """
    base = merge_quiet(scenarios)
    p_quiet = base[0].probability
    p0 = p_quiet + dp
    if not -1e-12 <= p0 <= 1 + 1e-12:
        raise ValidationError(f"no-disruption probability {p0} outside [0, 1]", field="dp")
    p0 = min(max(p0, 0.0), 1.0)
    rest = base[1:]
    if not rest or p_quiet >= 1.0:
        if abs(p0 - 1.0) > 1e-12:
            raise ValidationError("no disruptive scenario to carry the remaining mass", field="dp")
        return [base[0].with_probability(1.0)] + [s.with_probability(0.0) for s in rest]
    scale = (1.0 - p0) / (1.0 - p_quiet)
    return [base[0].with_probability(p0)] + [s.with_probability(s.probability * scale)
                                             for s in rest]


@dataclass
class SensitivityRow:
    dp: float
    p_quiet: float
    report: EvaluationReport
    plan: ShutoffPlan
    objective: float


def sensitivity_dp(case: PowerCase, base_scenarios, dps, eval_scenarios, epsilon: float = 1e-4,
                   cut_mode: str = "smc", threads: int = 1, backend: str | None = None) -> list:
    from . import decomposition

    evaluator = PlanEvaluator(case, backend)
    rows = []
    for dp in dps:
        weighted = reweight(base_scenarios, dp)
        res = decomposition.run(case, weighted, epsilon=epsilon, cut_mode=cut_mode,
                                threads=threads, backend=backend)
        rep = evaluate_plan(case, res.plan, eval_scenarios, tag=f"dp={dp:g}", evaluator=evaluator,
                            threads=threads)
        rows.append(SensitivityRow(dp, weighted[0].probability, rep, res.plan, res.objective))
    return rows


def sensitivity_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dp", "p_quiet", "objective", "nondisruptive_shed", "disruptive_shed",
                    "damage", "g_n", "lines_off_end"])
        for r in rows:
            w.writerow([r.dp, r.p_quiet, r.objective, r.report.nondisruptive_shed,
                        r.report.disruptive_shed, r.report.disruptive_damage, r.report.g_n,
                        r.plan.off_count(r.plan.z.shape[1] - 1)])


# -- exogenous / endogenous interaction ---------------------------------------------------

@dataclass
class InteractionStudy:
    plans: dict
    test_sets: dict
    reports: dict

    def table(self) -> list:
        rows = []
        for test in self.test_sets:
            for tag in self.plans:
                row = self.reports[(tag, test)].row()
                row["test_set"] = test
                rows.append(row)
        return rows


def interaction_study(case: PowerCase, n: int, seed: int, eval_n: int, epsilon: float = 1e-4,
                      cut_mode: str = "smc", threads: int = 1, backend: str | None = None,
                      geom=None, maps=None, env=None) -> InteractionStudy:
    """Plans trained on exo-only, endo-only and mixed scenarios, each tested on all three."""
    from . import decomposition
    from .geo_grid import build_grid
    from .wildfire.env import build_env
    from .wildfire.simulate import Simulator

    if geom is None:
        geom, maps = build_grid(case)
    env = env or build_env(case, geom)
    sims = {"exo": Simulator(case, geom, maps, env, exogenous=True, endogenous=False),
            "end": Simulator(case, geom, maps, env, exogenous=False, endogenous=True),
            "mix": Simulator(case, geom, maps, env)}
    plans = {}
    for tag, sim in sims.items():
        train = sim.generate(n, seed, threads=threads)
        res = decomposition.run(case, train, epsilon=epsilon, cut_mode=cut_mode, threads=threads,
                                backend=backend)
        plans[tag] = res.plan
    tests = {tag: sim.generate(eval_n, seed + 1, start=n, threads=threads)
             for tag, sim in sims.items()}
    evaluator = PlanEvaluator(case, backend)
    reports = {}
    for test, scen in tests.items():
        for tag, plan in plans.items():
            reports[(tag, test)] = evaluate_plan(case, plan, scen, tag=f"X_{tag}",
                                                 evaluator=evaluator, threads=threads)
    return InteractionStudy(plans, tests, reports)


__all__ = ["PlanEvaluator", "EvaluationReport", "evaluate_plan", "saa_study", "SaaStudy",
           "sensitivity_dp", "interaction_study", "reweight", "merge_quiet", "t_interval"]
