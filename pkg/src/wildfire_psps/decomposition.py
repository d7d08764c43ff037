"""Cutting-plane decomposition of the two-stage shut-off problem.

The master problem keeps the multi-period first stage and one recourse
estimate ``V[w]`` per disruptive scenario. Each iteration evaluates the true
recourse value at the master's state and adds one Lagrangian cut per
scenario. Cuts come either from maximizing the Lagrangian dual (``lc``) or
from the minimum-norm multiplier that keeps the cut within a ``delta``
fraction of tight (``smc``), which gives flatter cuts that stay useful away
from their anchor.

Every evaluation of the relaxed recourse problem at some multiplier yields a
feasible point ``(z_i, cost_i)``. Since ``cost_i + lam'(anchor - z_i)`` bounds
R(anchor, lam) from above for every multiplier and every anchor, these points
are cached per scenario and seed the dual models of later anchors.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .case_model import PowerCase, case_hash
from .errors import IterationLimit, LimitReached, ParseError, SolverError
from .milp import backends
from .milp.blocks import ShutoffPlan, build_first_stage, extract_plan, plan_hint, shed_terms
from .milp.dispatch import all_on_plan, polish_dispatch
from .milp.extensive import shed_weights
from .milp.model import INF, Limits, LinearModel
from .milp.second_stage import SUBPROBLEM_LIMITS, LagrangianPoint, SecondStageModel
from .wildfire.scenario import DisruptionScenario

log = logging.getLogger(__name__)

CUT_MODES = ("lc", "smc")


# -- cuts ---------------------------------------------------------------------

@dataclass
class Cut:
    """``V[scenario] >= intercept + lam'(z - anchor)`` on the state at tau-1."""

    scenario: int
    lam: np.ndarray
    intercept: float
    anchor: np.ndarray
    iteration: int = 0
    mode: str = "lc"
    target: float = math.nan

    def value(self, z) -> float:
        return float(self.intercept + self.lam @ (np.asarray(z, dtype=float) - self.anchor))

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "lam": self.lam.tolist(), "intercept": self.intercept,
                "anchor": self.anchor.astype(int).tolist(), "iteration": self.iteration,
                "mode": self.mode, "target": None if math.isnan(self.target) else self.target}

    @classmethod
    def from_dict(cls, d: dict) -> "Cut":
        return cls(int(d["scenario"]), np.array(d["lam"], dtype=float), float(d["intercept"]),
                   np.array(d["anchor"], dtype=float), int(d.get("iteration", 0)),
                   d.get("mode", "lc"), math.nan if d.get("target") is None else float(d["target"]))


@dataclass
class BoundsRecord:
    iteration: int
    lb: float
    ub: float
    incumbent: str
    wall_time: float
    n_cuts: int


@dataclass
class BoundsLog:
    records: list = field(default_factory=list)

    def append(self, rec: BoundsRecord) -> None:
        self.records.append(rec)

    @property
    def lb(self) -> list:
        return [r.lb for r in self.records]

    @property
    def ub(self) -> list:
        return [r.ub for r in self.records]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "lb", "ub", "gap", "incumbent", "wall_time", "n_cuts"])
            for r in self.records:
                w.writerow([r.iteration, repr(r.lb), repr(r.ub), repr(relative_gap(r.lb, r.ub)),
                            r.incumbent, f"{r.wall_time:.6f}", r.n_cuts])

    def to_list(self) -> list:
        return [vars(r) for r in self.records]

    @classmethod
    def from_list(cls, items) -> "BoundsLog":
        return cls([BoundsRecord(**d) for d in items])


def relative_gap(lb: float, ub: float) -> float:
    if not math.isfinite(ub) or not math.isfinite(lb):
        return math.inf
    return (ub - lb) / max(abs(ub), 1e-12) if ub != 0 else (0.0 if lb >= ub else math.inf)


# -- per-scenario oracle and dual state ------------------------------------------

class DualState:
    """Cached feasible points of one scenario's relaxed recourse problem."""

    def __init__(self, n: int):
        self.z = np.zeros((0, n))
        self.cost = np.zeros(0)
        self._index: dict[bytes, int] = {}
        self.best_lam: dict[bytes, np.ndarray] = {}

    def add(self, z, cost: float) -> bool:
        """Record point; returns True if it is new or lowers a known cost."""
        z = np.rint(np.asarray(z, dtype=float))
        key = z.astype(np.int8).tobytes()
        i = self._index.get(key)
        if i is None:
            self._index[key] = len(self.cost)
            self.z = np.vstack([self.z, z])
            self.cost = np.append(self.cost, cost)
            return True
        if cost < self.cost[i] - 1e-12:
            self.cost[i] = cost
            return True
        return False

    def upper_model(self, anchor, lam) -> float:
        """min_i cost_i + lam'(anchor - z_i): overestimates R(anchor, lam)."""
        if not len(self.cost):
            return math.inf
        return float(np.min(self.cost + (np.asarray(anchor) - self.z) @ lam))

    def __len__(self):
        return len(self.cost)


class ScenarioOracle:
    """Recourse value f and relaxation R of one scenario, with caching."""

    def __init__(self, case: PowerCase, scenario: DisruptionScenario, index: int,
                 backend: str | None = None, limits: Limits | None = None):
        self.index = index
        self.scenario = scenario
        self.model = SecondStageModel(case, scenario, backend, limits)
        self.n = case.n_components
        self.dual = DualState(self.n)
        self._f: dict[bytes, tuple[float, float]] = {}
        self.n_f = 0
        self.n_r = 0

    def f(self, anchor) -> tuple[float, float]:
        """``(value, certified lower bound)`` of f at the anchor."""
        anchor = np.rint(np.asarray(anchor, dtype=float))
        key = anchor.astype(np.int8).tobytes()
        if key not in self._f:
            out = self.model.value(anchor)
            self.n_f += 1
            self._f[key] = (out.objective, out.bound)
            self.dual.add(anchor, out.objective)
        return self._f[key]

    def R(self, anchor, lam) -> LagrangianPoint:
        pt = self.model.lagrangian(anchor, lam)
        self.n_r += 1
        self.dual.add(pt.z, pt.cost)
        return pt


# -- dual and square-minimization cuts --------------------------------------------

@dataclass
class DualResult:
    lam: np.ndarray
    value: float
    iterations: int
    converged: bool


class _StabilizedQP:
    """QP over multipliers with rows ``cost_i + lam'(anchor - z_i) >= r`` or ``>= target``."""

    def __init__(self, anchor: np.ndarray, with_level: bool, backend: str | None = None):
        n = len(anchor)
        m = LinearModel(name="dual_qp")
        self.lam = m.add_vars("lam", n, -INF, INF)
        self.r = m.add_var("r", -INF, INF) if with_level else None
        self.session = backends.HighsSession(m)
        self.anchor = anchor
        self.n = n
        self.rows: set[bytes] = set()

    def add_rows(self, dual: DualState, rhs: float | None = None) -> int:
        added = 0
        for z, cost in zip(dual.z, dual.cost):
            g = self.anchor - z
            key = z.astype(np.int8).tobytes() + np.float64(cost).tobytes()
            if key in self.rows:
                continue
            self.rows.add(key)
            nz = np.flatnonzero(g)
            if self.r is None:
                if not len(nz):
                    continue
                # cost + g'lam >= rhs
                self.session.add_row(nz, g[nz], rhs - cost, INF)
            else:
                # r - g'lam <= cost
                idx = np.concatenate([[self.r], nz])
                self.session.add_row(idx, np.concatenate([[1.0], -g[nz]]), -INF, cost)
            added += 1
        return added

    def solve_level(self, center: np.ndarray, mu: float):
        """max r - mu/2 |lam - center|^2 over the current rows."""
        c = np.zeros(self.n + 1)
        c[:self.n] = -mu * center
        c[self.r] = -1.0
        self.session.set_costs(c, 0.5 * mu * float(center @ center))
        diag = np.zeros(self.n + 1)
        diag[:self.n] = mu
        self.session.set_hessian_diagonal(diag)
        res = self.session.solve(Limits(gap=0.0))
        if not res.ok:
            raise SolverError(f"dual QP ended with status {res.status.value}")
        return res.x[:self.n], float(res.x[self.r])

    def solve_projection(self, center: np.ndarray):
        """min |lam - center|^2 over the current rows."""
        self.session.set_costs(-2.0 * center, float(center @ center))
        self.session.set_hessian_diagonal(np.full(self.n, 2.0))
        res = self.session.solve(Limits(gap=0.0))
        if not res.ok:
            raise SolverError(f"projection QP ended with status {res.status.value}")
        return res.x[:self.n]


def _tol(f_hat: float) -> float:
    return 1e-7 * max(1.0, abs(f_hat))


def solve_dual(oracle: ScenarioOracle, anchor, f_hat: float | None = None, tol: float | None = None,
               max_iter: int = 200, backend: str | None = None) -> DualResult:
    """Proximal bundle maximization of the concave map lam -> R(anchor, lam).

    Starts from lam = 0 with proximal weight 1/max(f, 1); the weight is halved
    after every null step. Stops once the model's predicted increase falls
    below ``tol`` or R reaches f(anchor), which is the dual optimum for a
    binary anchor.
    """
    anchor = np.rint(np.asarray(anchor, dtype=float))
    if f_hat is None:
        f_hat = oracle.f(anchor)[0]
    tol = _tol(f_hat) if tol is None else tol
    center = np.zeros(len(anchor))
    pt = oracle.R(anchor, center)
    center_val = pt.bound
    best = (center.copy(), pt.bound)
    if best[1] >= f_hat - tol:
        return DualResult(best[0], best[1], 1, True)
    qp = _StabilizedQP(anchor, with_level=True, backend=backend)
    mu = 1.0 / max(abs(f_hat), 1.0)
    for it in range(2, max_iter + 1):
        qp.add_rows(oracle.dual)
        lam, level = qp.solve_level(center, mu)
        predicted = level - center_val
        if predicted <= tol:
            return DualResult(best[0], best[1], it, True)
        pt = oracle.R(anchor, lam)
        if pt.bound > best[1]:
            best = (lam.copy(), pt.bound)
        if best[1] >= f_hat - tol:
            return DualResult(best[0], best[1], it, True)
        if pt.bound - center_val >= 0.1 * predicted:
            center, center_val = lam, pt.bound
        else:
            mu *= 0.5
    raise IterationLimit("dual bundle hit its iteration cap",
                         incumbent=DualResult(best[0], best[1], max_iter, False))


def project_multiplier(oracle: ScenarioOracle, anchor, target: float, center=None,
                       max_iter: int = 200, backend: str | None = None) -> DualResult:
    """Multiplier closest to ``center`` with R(anchor, lam) >= target, by row generation.

    Rows come from the cached feasible points; each round evaluates R at the
    QP solution and adds the minimizer if the requirement is still violated.
    """
    anchor = np.rint(np.asarray(anchor, dtype=float))
    center = np.zeros(len(anchor)) if center is None else np.asarray(center, dtype=float)
    margin = _tol(target)
    qp = _StabilizedQP(anchor, with_level=False, backend=backend)
    lam = center.copy()
    best = (center.copy(), -math.inf)
    for it in range(1, max_iter + 1):
        # R <= upper model, so only evaluate where the model says the target may hold
        if oracle.dual.upper_model(anchor, lam) >= target:
            pt = oracle.R(anchor, lam)
            if pt.bound > best[1]:
                best = (lam.copy(), pt.bound)
            if pt.bound >= target:
                return DualResult(lam.copy(), pt.bound, it, True)
        if not qp.add_rows(oracle.dual, rhs=target + margin):
            break
        lam = qp.solve_projection(center)
    raise IterationLimit("multiplier projection did not reach its target",
                         incumbent=DualResult(best[0], best[1], max_iter, False))


def steep_cut_multiplier(anchor, f_hat: float) -> np.ndarray:
    """lam = f(anchor)(2 anchor - 1) gives R(anchor, lam) = f(anchor) whenever f >= 0."""
    return float(max(f_hat, 0.0)) * (2.0 * np.asarray(anchor, dtype=float) - 1.0)


def lagrangian_cut(oracle: ScenarioOracle, anchor, iteration: int = 0, max_iter: int = 200,
                   backend: str | None = None) -> Cut:
    """Tight cut from the dual; falls back to projection and then to the steep cut."""
    anchor = np.rint(np.asarray(anchor, dtype=float))
    f_hat, f_lb = oracle.f(anchor)
    tol = _tol(f_hat)
    try:
        res = solve_dual(oracle, anchor, f_hat, tol, max_iter, backend)
    except IterationLimit as exc:
        res = exc.incumbent
    if res.value < f_hat - tol:
        try:
            res = project_multiplier(oracle, anchor, f_hat - tol, res.lam, max_iter, backend)
        except IterationLimit:
            lam = steep_cut_multiplier(anchor, f_lb)
            return Cut(oracle.index, lam, f_lb, anchor, iteration, "lc-steep", f_hat)
    oracle.dual.best_lam[anchor.astype(np.int8).tobytes()] = res.lam
    return Cut(oracle.index, res.lam, min(res.value, f_hat), anchor, iteration, "lc", f_hat)


def smc_cut(oracle: ScenarioOracle, anchor, delta: float = 1e-4, iteration: int = 0,
            max_iter: int = 200, backend: str | None = None) -> Cut:
    """Minimum-norm multiplier with R(anchor, lam) >= (1 - delta) f(anchor)."""
    anchor = np.rint(np.asarray(anchor, dtype=float))
    f_hat, _ = oracle.f(anchor)
    target = (1.0 - delta) * f_hat
    if f_hat <= 0:
        return Cut(oracle.index, np.zeros(len(anchor)), 0.0, anchor, iteration, "smc", 0.0)
    try:
        res = project_multiplier(oracle, anchor, target, None, max_iter, backend)
    except IterationLimit:
        cut = lagrangian_cut(oracle, anchor, iteration, max_iter, backend)
        cut.mode = "smc-fallback"
        return cut
    return Cut(oracle.index, res.lam, min(res.value, f_hat), anchor, iteration, "smc", target)


# -- master -------------------------------------------------------------------------

@dataclass
class MasterHandles:
    model: LinearModel
    first_stage: object
    V: dict
    zero_state: list | None


def build_master(case: PowerCase, scenarios, cuts=()) -> MasterHandles:
    """First stage over all periods plus recourse estimates bounded below by 0 and by cuts."""
    m = LinearModel(name="master")
    fs = build_first_stage(m, case)
    weights = shed_weights(case, scenarios)
    for t in range(1, case.horizon + 1):
        if weights[t]:
            terms, const = shed_terms(case, fs.period[t], weights[t])
            m.add_objective(terms, const)
    V = {}
    for i, s in enumerate(scenarios):
        if s.disruptive and s.probability > 0:
            V[i] = m.add_var(f"V[{i}]", 0.0, INF)
            m.add_objective({V[i]: s.probability})
    handles = MasterHandles(m, fs, V, None)
    for cut in cuts:
        idx, coef, rhs = cut_row(handles, scenarios[cut.scenario], cut)
        m.add_constraint(list(zip(idx, coef)), ">=", rhs, f"cut[{cut.scenario},{cut.iteration}]")
    return handles


def master_start(h: MasterHandles, scenarios, plan: ShutoffPlan, cuts) -> np.ndarray:
    """Feasible master point at ``plan``: each V at the largest of its cuts (or 0)."""
    m = h.model
    x = np.array([lo if math.isfinite(lo) else 0.0 for lo in m.lower])
    for j, v in plan_hint(h.first_stage, plan).items():
        x[j] = v
    for i, j in h.V.items():
        x[j] = 0.0
    for cut in cuts:
        j = h.V[cut.scenario]
        x[j] = max(x[j], cut.value(plan.anchor(scenarios[cut.scenario].tau)))
    return x


def cut_row(h: MasterHandles, scenario: DisruptionScenario, cut: Cut):
    """``V - lam'z >= intercept - lam'anchor`` with z the master state at tau-1."""
    v = h.V[cut.scenario]
    rhs = cut.intercept - float(cut.lam @ cut.anchor)
    if scenario.tau == 1:
        # state before the horizon is all ones
        return [v], [1.0], rhs + float(cut.lam.sum())
    zvars = h.first_stage.z[scenario.tau - 1]
    nz = np.flatnonzero(cut.lam)
    return [v] + [zvars[c] for c in nz], [1.0] + [-float(cut.lam[c]) for c in nz], rhs


# -- Algorithm driver ------------------------------------------------------------------

@dataclass
class RunLimits:
    max_iterations: int = 500
    time: float = math.inf
    master_gap: float | None = None
    dual_iterations: int = 200


@dataclass
class DecompositionResult:
    plan: ShutoffPlan | None
    objective: float
    lower_bound: float
    gap: float
    status: str
    iterations: int
    bounds: BoundsLog
    cuts: list
    stats: dict


def plan_hash(plan: ShutoffPlan) -> str:
    return hashlib.sha256(plan.z.astype(np.int8).tobytes()).hexdigest()[:12]


def scenario_set_hash(scenarios) -> str:
    blob = json.dumps([[list(map(str, s.signature())), s.probability] for s in scenarios])
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run(case: PowerCase, scenarios, epsilon: float = 0.01, delta: float = 1e-4,
        cut_mode: str = "smc", limits: RunLimits | None = None, threads: int = 1,
        backend: str | None = None, checkpoint=None, resume: bool = False,
        subproblem_limits: Limits | None = None, raise_on_limit: bool = False,
        polish: bool = True) -> DecompositionResult:
    """Iterate master solve, recourse evaluation and cut generation until the gap closes.

    Returns the incumbent plan whose in-sample objective is within
    ``epsilon`` (relative) of the master lower bound. Hitting the iteration
    or time cap returns the incumbent with status ``limit`` (or raises
    ``LimitReached`` when ``raise_on_limit``).
    """
    if cut_mode not in CUT_MODES:
        raise ValueError(f"cut mode must be one of {CUT_MODES}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("at least one scenario is required")
    limits = limits or RunLimits()
    t_start = time.perf_counter()
    handles = build_master(case, scenarios)
    master = backends.session(handles.model, backend)
    master_gap = limits.master_gap if limits.master_gap is not None else min(1e-6, epsilon / 10 or 1e-9)
    deadline = t_start + limits.time
    active = sorted(handles.V)
    oracles = {i: ScenarioOracle(case, scenarios[i], i, backend, subproblem_limits or SUBPROBLEM_LIMITS)
               for i in active}
    cuts: list[Cut] = []
    tight_anchor: dict[int, set] = {i: set() for i in active}
    bounds = BoundsLog()
    lb, ub = -math.inf, math.inf
    incumbent: ShutoffPlan | None = None
    start_iter = 1

    def add_cut(cut: Cut) -> None:
        idx, coef, rhs = cut_row(handles, scenarios[cut.scenario], cut)
        master.add_row(idx, coef, rhs, INF)
        cuts.append(cut)
        if cut.intercept >= oracles[cut.scenario].f(cut.anchor)[0] - 1e-6 * max(1.0, abs(cut.intercept)):
            tight_anchor[cut.scenario].add(cut.anchor.astype(np.int8).tobytes())

    if resume and checkpoint and Path(checkpoint).exists():
        state = load_checkpoint(checkpoint, case, scenarios)
        for cut in state["cuts"]:
            add_cut(cut)
        bounds = state["bounds"]
        incumbent = state["incumbent"]
        lb, ub = state["lb"], state["ub"]
        start_iter = state["iteration"] + 1

    status = "limit"
    iteration = start_iter - 1
    start_plan = incumbent or all_on_plan(case)
    for iteration in range(start_iter, limits.max_iterations + 1):
        # HiGHS heuristics can miss even the trivial plan on large cases
        master.hint(master_start(handles, scenarios, incumbent or start_plan, cuts))
        remaining = max(deadline - time.perf_counter(), 1.0)
        res = master.solve(Limits(gap=master_gap, abs_gap=1e-10, time=remaining))
        if not res.ok or res.x is None:
            raise SolverError(f"master problem ended with status {res.status.value}")
        plan = extract_plan(case, handles.first_stage, res.x)
        lb = max(lb, min(res.bound, res.objective))
        v_hat = {i: float(res.x[handles.V[i]]) for i in active}
        anchors = {i: plan.anchor(scenarios[i].tau) for i in active}
        f_vals = dict(zip(active, _map(lambda i: oracles[i].f(anchors[i])[0], active, threads)))
        z_bar = res.objective + sum(scenarios[i].probability * (f_vals[i] - v_hat[i]) for i in active)
        if z_bar < ub - 1e-9:
            ub, incumbent = z_bar, plan
        elapsed = time.perf_counter() - t_start
        bounds.append(BoundsRecord(iteration, lb, ub, plan_hash(incumbent), elapsed, len(cuts)))
        log.info("iteration %d: LB %.6f UB %.6f gap %.3g", iteration, lb, ub, relative_gap(lb, ub))
        if ub - lb <= epsilon * abs(ub) + 1e-7 * max(1.0, abs(ub)):
            status = "optimal"
            break

        def make_cut(i):
            if time.perf_counter() > deadline:
                return None
            a = anchors[i]
            key = a.astype(np.int8).tobytes()
            if key in tight_anchor[i]:
                return None
            repeated = any(c.scenario == i and np.array_equal(c.anchor, a) for c in cuts)
            if cut_mode == "lc" or repeated:
                return lagrangian_cut(oracles[i], a, iteration, limits.dual_iterations, backend)
            return smc_cut(oracles[i], a, delta, iteration, limits.dual_iterations, backend)

        new = [c for c in _map(make_cut, active, threads) if c is not None]
        for cut in new:
            add_cut(cut)
        if checkpoint:
            save_checkpoint(checkpoint, case, scenarios, cuts, bounds, incumbent, lb, ub, iteration)
        if time.perf_counter() > deadline:
            break
        if not new:
            status = "stalled"
            break
    gap = relative_gap(lb, ub)
    if incumbent is not None and polish:
        incumbent = polish_dispatch(case, incumbent)
    stats = {
        "f_evaluations": sum(o.n_f for o in oracles.values()),
        "r_evaluations": sum(o.n_r for o in oracles.values()),
        "wall_time": time.perf_counter() - t_start,
        "cut_modes": {m: sum(c.mode == m for c in cuts) for m in {c.mode for c in cuts}},
    }
    result = DecompositionResult(incumbent, ub, lb, gap, status, iteration, bounds, cuts, stats)
    if checkpoint:
        save_checkpoint(checkpoint, case, scenarios, cuts, bounds, incumbent, lb, ub, iteration)
    if status == "limit" and raise_on_limit:
        raise LimitReached(f"decomposition stopped at gap {gap:.3g}", incumbent=result, gap=gap)
    return result


def iterations_to_gap(bounds: BoundsLog, gap: float) -> int | None:
    """First iteration whose relative gap is at most ``gap``."""
    for r in bounds.records:
        if relative_gap(r.lb, r.ub) <= gap + 1e-12:
            return r.iteration
    return None


# -- checkpoints -----------------------------------------------------------------------

def save_checkpoint(path, case, scenarios, cuts, bounds, incumbent, lb, ub, iteration) -> None:
    doc = {
        "case_hash": case_hash(case),
        "scenario_hash": scenario_set_hash(scenarios),
        "iteration": iteration,
        "lb": lb if math.isfinite(lb) else None,
        "ub": ub if math.isfinite(ub) else None,
        "cuts": [c.to_dict() for c in cuts],
        "bounds": bounds.to_list(),
        "incumbent": None if incumbent is None else incumbent.to_dict(),
    }
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(doc))
    tmp.replace(path)


def load_checkpoint(path, case, scenarios) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read checkpoint {path}: {exc}") from exc
    if doc.get("case_hash") != case_hash(case) or doc.get("scenario_hash") != scenario_set_hash(scenarios):
        raise ParseError(f"checkpoint {path} belongs to a different case or scenario set")
    return {
        "cuts": [Cut.from_dict(c) for c in doc["cuts"]],
        "bounds": BoundsLog.from_list(doc["bounds"]),
        "incumbent": None if doc["incumbent"] is None else ShutoffPlan.from_dict(doc["incumbent"]),
        "lb": -math.inf if doc["lb"] is None else doc["lb"],
        "ub": math.inf if doc["ub"] is None else doc["ub"],
        "iteration": int(doc["iteration"]),
    }
