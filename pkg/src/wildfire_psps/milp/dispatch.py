"""Single-period load-shed minimization for a fixed energization state."""

from __future__ import annotations

import math
import threading

import numpy as np

from ..case_model import PowerCase
from ..errors import SolverError
from . import backends
from .blocks import add_period_vars, build_flow_block, build_logic_block
from .model import Limits, LinearModel, Status


class PeriodDispatch:
    """Solves min sum_d w_d (1 - x_d) for one period with z fixed.

    Periods with equal demand share one loaded model. Returns ``inf`` shed
    when the fixed state is inconsistent (e.g. a line on at a dead bus).
    """

    def __init__(self, case: PowerCase, backend: str | None = None):
        self.case = case
        self.backend = backend
        self._sessions = {}
        self._lock = threading.Lock()
        self._demand = case.demand_matrix()

    def _session(self, t: int):
        key = tuple(self._demand[:, t - 1])
        with self._lock:
            if key not in self._sessions:
                m = LinearModel(name=f"dispatch{t}")
                z = m.add_vars("z", self.case.n_components, 0.0, 1.0)
                pv = add_period_vars(m, self.case, "")
                build_flow_block(m, self.case, t, pv, z)
                build_logic_block(m, self.case, z, pv.x)
                w = self.case.priorities()
                m.set_objective([(pv.x[d], -w[d]) for d in range(self.case.n_load)], float(w.sum()))
                self._sessions[key] = (backends.session(m, self.backend), z, pv, threading.Lock())
            return self._sessions[key]

    def solve(self, z_col, t: int):
        """Returns ``(shed, x, theta, flow, gen)``; shed is inf if infeasible."""
        sess, zv, pv, lock = self._session(t)
        z_col = np.asarray(z_col, dtype=float)
        with lock:
            sess.set_bounds(zv, z_col, z_col)
            res = sess.solve(Limits(gap=0.0))
        if res.status == Status.INFEASIBLE:
            return math.inf, None, None, None, None
        if res.status != Status.OPTIMAL:
            raise SolverError(f"dispatch LP ended with status {res.status.value}")
        x = res.x
        return (max(res.objective, 0.0), np.clip(x[pv.x], 0, 1), x[pv.theta], x[pv.flow],
                x[pv.gen])


def polish_dispatch(case: PowerCase, plan, dispatcher: PeriodDispatch | None = None):
    """Re-optimize a plan's dispatch period by period, keeping its z."""
    dispatcher = dispatcher or PeriodDispatch(case)
    for t in range(1, case.horizon + 1):
        shed, x, theta, flow, gen = dispatcher.solve(plan.z[:, t], t)
        if not math.isfinite(shed):
            raise SolverError(f"plan state at period {t} admits no dispatch")
        plan.x[:, t - 1], plan.theta[:, t - 1] = x, theta
        plan.flow[:, t - 1], plan.gen[:, t - 1] = flow, gen
    return plan


def all_on_plan(case: PowerCase, dispatcher: PeriodDispatch | None = None):
    """Everything energized in every period, with optimal dispatch; always feasible."""
    from .blocks import ShutoffPlan

    T = case.horizon
    plan = ShutoffPlan(np.ones((case.n_components, T + 1), dtype=int), np.ones((case.n_load, T)),
                       np.zeros((case.n_bus, T)), np.zeros((case.n_line, T)),
                       np.zeros((case.n_gen, T)))
    return polish_dispatch(case, plan, dispatcher)
