"""Post-disruption recourse model, its value function f and Lagrangian relaxation R.

After disruption in period tau the operator can only switch components off
(``y <= z``), components hit by fire are lost (``y <= 1 - eta``), and fire
damage ``eta`` is forced by exogenous burns and by faults of components that
were still energized.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ..case_model import PowerCase
from ..errors import SolverError
from ..wildfire.scenario import DisruptionScenario
from . import backends
from .blocks import add_period_vars, build_flow_block, build_logic_block
from .model import Limits, LinearModel

SUBPROBLEM_LIMITS = Limits(gap=1e-6, abs_gap=1e-9)


@dataclass
class SecondStageBlock:
    """Variable handles and objective of one scenario's recourse block."""

    tau: int
    zc: list
    y: list
    eta: list
    period: dict
    obj: list
    constant: float


def build_second_stage_block(model: LinearModel, case: PowerCase, scenario: DisruptionScenario,
                             zc=None, tag: str = "") -> SecondStageBlock:
    """Adds recourse variables and constraints for periods tau..T.

    ``zc`` supplies existing variables for the local copy of the state at
    tau-1; by default fresh binaries are created. The returned objective is
    unweighted.
    """
    if not scenario.disruptive:
        raise ValueError("scenario without disruption has no recourse block")
    C, T = case.n_components, case.horizon
    tau = scenario.tau
    if zc is None:
        zc = model.add_vars(f"zc{tag}", C, binary=True)
    y = model.add_vars(f"y{tag}", C, binary=True)
    eta = model.add_vars(f"eta{tag}", C, binary=True)
    for c in scenario.v:
        model.lower[eta[c]] = 1.0
    period = {}
    for t in range(tau, T + 1):
        pv = add_period_vars(model, case, f"{tag}_{t}")
        period[t] = pv
        build_flow_block(model, case, t, pv, y)
        build_logic_block(model, case, y, pv.x, tag=f"{tag}_{t}")
    for c in range(C):
        model.add_constraint([(y[c], 1.0), (zc[c], -1.0)], "<=", 0.0, f"y_le_z{tag}[{c}]")
        model.add_constraint([(y[c], 1.0), (eta[c], 1.0)], "<=", 1.0, f"y_le_1-eta{tag}[{c}]")
    for c in sorted(scenario.u):
        for k in sorted(scenario.fire_sets[c]):
            model.add_constraint([(eta[k], 1.0), (zc[c], -1.0)], ">=", 0.0,
                                 f"ignite{tag}[{c},{k}]")
    w = case.priorities()
    r = case.damage_costs()
    obj = []
    constant = 0.0
    for t, pv in period.items():
        obj += [(pv.x[d], -w[d]) for d in range(case.n_load)]
        constant += float(w.sum())
    obj += [(eta[c], float(r[c])) for c in range(C) if r[c]]
    return SecondStageBlock(tau, zc, y, eta, period, obj, constant)


@dataclass
class SecondStageOutcome:
    objective: float
    bound: float
    z: np.ndarray
    y: np.ndarray
    eta: np.ndarray
    x: np.ndarray
    shed: float
    damage: float
    dispatch: dict = field(default_factory=dict)


@dataclass
class LagrangianPoint:
    """One evaluation of R at multiplier ``lam``.

    ``value`` is the primal objective, ``bound`` a certified lower bound on
    R(lam), ``z`` the minimizing local copy and ``cost`` the pure recourse
    cost at that point (an upper bound on f(z)).
    """

    lam: np.ndarray
    value: float
    bound: float
    z: np.ndarray
    cost: float

    def subgradient(self, anchor) -> np.ndarray:
        return np.asarray(anchor, dtype=float) - self.z


class SecondStageModel:
    """Persistent recourse model of one scenario.

    Evaluating f fixes the local copy through its bounds; evaluating R frees
    it and adds the multiplier term to the costs. The loaded solver model is
    reused across calls and warm-started from the previous solution.
    """

    def __init__(self, case: PowerCase, scenario: DisruptionScenario, backend: str | None = None,
                 limits: Limits | None = None):
        self.case = case
        self.scenario = scenario
        self.limits = limits or SUBPROBLEM_LIMITS
        m = LinearModel(name=f"recourse_tau{scenario.tau}")
        self.block = build_second_stage_block(m, case, scenario)
        m.set_objective(self.block.obj, self.block.constant)
        self.model = m
        self.base_cost = m.cost_vector()
        self.session = backends.session(m, backend)
        self.lock = threading.Lock()
        self.n_solves = 0

    @property
    def n_components(self) -> int:
        return self.case.n_components

    def _solve(self):
        res = self.session.solve(self.limits)
        self.n_solves += 1
        if not res.ok or res.x is None:
            raise SolverError(f"recourse model ended with status {res.status.value}")
        return res

    def _split(self, x) -> tuple[float, float]:
        w = self.case.priorities()
        shed = sum(float(w @ (1.0 - np.clip(x[pv.x], 0, 1))) for pv in self.block.period.values())
        r = self.case.damage_costs()
        damage = float(r @ np.rint(x[self.block.eta]))
        return shed, damage

    def value(self, anchor) -> SecondStageOutcome:
        """f(anchor): the recourse optimum with the local copy fixed."""
        anchor = np.asarray(anchor, dtype=float)
        b = self.block
        with self.lock:
            self.session.set_costs(self.base_cost, self.block.constant)
            self.session.set_bounds(b.zc, anchor, anchor)
            res = self._solve()
        x = res.x
        shed, damage = self._split(x)
        dispatch = {t: {"x": x[pv.x], "theta": x[pv.theta], "flow": x[pv.flow], "gen": x[pv.gen]}
                    for t, pv in b.period.items()}
        return SecondStageOutcome(objective=res.objective, bound=min(res.bound, res.objective),
                                  z=anchor.copy(), y=np.rint(x[b.y]), eta=np.rint(x[b.eta]),
                                  x=np.array([x[pv.x] for pv in b.period.values()]),
                                  shed=shed, damage=damage, dispatch=dispatch)

    def lagrangian(self, anchor, lam) -> LagrangianPoint:
        """R(anchor, lam) = min f-objective + lam'(anchor - z) over free binary z."""
        anchor = np.asarray(anchor, dtype=float)
        lam = np.asarray(lam, dtype=float)
        b = self.block
        cost = self.base_cost.copy()
        cost[b.zc] -= lam
        constant = self.block.constant + float(lam @ anchor)
        with self.lock:
            self.session.set_costs(cost, constant)
            C = self.n_components
            self.session.set_bounds(b.zc, np.zeros(C), np.ones(C))
            res = self._solve()
        z = np.rint(res.x[b.zc])
        pure = res.objective - float(lam @ (anchor - z))
        bound = min(res.bound, res.objective)
        return LagrangianPoint(lam=lam.copy(), value=res.objective, bound=bound, z=z, cost=pure)


def second_stage_value(case: PowerCase, scenario: DisruptionScenario, anchor,
                       backend: str | None = None) -> SecondStageOutcome:
    """One-shot f evaluation; zero outcome for a scenario without disruption."""
    if not scenario.disruptive:
        C = case.n_components
        return SecondStageOutcome(0.0, 0.0, np.asarray(anchor, dtype=float), np.zeros(C),
                                  np.zeros(C), np.zeros((0, case.n_load)), 0.0, 0.0)
    return SecondStageModel(case, scenario, backend).value(anchor)


def lagrangian_value(case: PowerCase, scenario: DisruptionScenario, anchor, lam,
                     backend: str | None = None):
    """Returns ``(R, minimizing z, subgradient anchor - z)``."""
    if not scenario.disruptive:
        return 0.0, np.asarray(anchor, dtype=float), np.zeros(len(anchor))
    pt = SecondStageModel(case, scenario, backend).lagrangian(anchor, lam)
    return pt.value, pt.z, pt.subgradient(anchor)

