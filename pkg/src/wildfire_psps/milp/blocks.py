"""Constraint blocks shared by every network model: DC flow with switching,
component logic, and the multi-period first stage.

Sign convention: line susceptance is stored as a positive magnitude and an
energized line carries ``P = base_mva * b * (theta_from - theta_to)`` MW.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..case_model import PowerCase
from ..errors import ModelBuildError, ParseError, ValidationError
from .model import INF, LinearModel


@dataclass
class PeriodVars:
    """Variable indices of one period's dispatch."""

    x: list
    theta: list
    flow: list
    gen: list


def add_period_vars(model: LinearModel, case: PowerCase, tag: str) -> PeriodVars:
    x = model.add_vars(f"x{tag}", case.n_load, 0.0, 1.0)
    theta = model.add_vars(f"theta{tag}", case.n_bus, -INF, INF)
    flow = [model.add_var(f"pl{tag}[{l}]", -line.thermal_limit, line.thermal_limit)
            for l, line in enumerate(case.lines)]
    gen = [model.add_var(f"pg{tag}[{g}]", min(0.0, gd.p_min), max(0.0, gd.p_max))
           for g, gd in enumerate(case.generators)]
    return PeriodVars(x, theta, flow, gen)


def build_flow_block(model: LinearModel, case: PowerCase, t: int, pv: PeriodVars,
                     avail) -> list[int]:
    """DC power flow of period ``t`` with component availability variables ``avail``.

    ``avail`` lists one variable index per component in canonical order.
    Returns the indices of the added rows.
    """
    C = case.n_components
    if len(avail) != C or any(a is None for a in avail):
        raise ModelBuildError("availability variables must cover every component")
    for name, vec, n in (("x", pv.x, case.n_load), ("theta", pv.theta, case.n_bus),
                         ("flow", pv.flow, case.n_line), ("gen", pv.gen, case.n_gen)):
        if len(vec) != n:
            raise ModelBuildError(f"period {t}: {name} variables missing")
    if not 1 <= t <= case.horizon:
        raise ModelBuildError(f"period {t} outside horizon")
    lo_ang, hi_ang = case.angle_bounds
    demand = case.demand_matrix()[:, t - 1]
    nb, ng = case.n_bus, case.n_gen
    rows = []
    ends = case.line_ends()
    for l, line in enumerate(case.lines):
        i, j = ends[l]
        z = avail[nb + ng + l]
        beta = case.base_mva * line.susceptance
        P, ti, tj = pv.flow[l], pv.theta[i], pv.theta[j]
        rows.append(model.add_constraint([(P, 1.0), (ti, -beta), (tj, beta), (z, beta * hi_ang)],
                                         "<=", beta * hi_ang, f"angle_hi{t}[{l}]"))
        rows.append(model.add_constraint([(P, 1.0), (ti, -beta), (tj, beta), (z, beta * lo_ang)],
                                         ">=", beta * lo_ang, f"angle_lo{t}[{l}]"))
        rows.append(model.add_constraint([(P, 1.0), (z, -line.thermal_limit)], "<=", 0.0,
                                         f"therm_hi{t}[{l}]"))
        rows.append(model.add_constraint([(P, 1.0), (z, line.thermal_limit)], ">=", 0.0,
                                         f"therm_lo{t}[{l}]"))
    balance = [[] for _ in range(nb)]
    for g, b in enumerate(case.gen_bus()):
        balance[b].append((pv.gen[g], 1.0))
    for l, (i, j) in enumerate(ends):
        balance[i].append((pv.flow[l], -1.0))
        balance[j].append((pv.flow[l], 1.0))
    for d, b in enumerate(case.load_bus()):
        if demand[d]:
            balance[b].append((pv.x[d], -float(demand[d])))
    for i in range(nb):
        if balance[i]:
            rows.append(model.add_constraint(balance[i], "==", 0.0, f"balance{t}[{i}]"))
    for g, gd in enumerate(case.generators):
        z = avail[nb + g]
        rows.append(model.add_constraint([(pv.gen[g], 1.0), (z, -gd.p_min)], ">=", 0.0,
                                         f"pmin{t}[{g}]"))
        rows.append(model.add_constraint([(pv.gen[g], 1.0), (z, -gd.p_max)], "<=", 0.0,
                                         f"pmax{t}[{g}]"))
    return rows


def build_logic_block(model: LinearModel, case: PowerCase, z, x=None, z_next=None,
                      tag: str = "") -> list[int]:
    """Bus-attachment logic for ``z`` (and loads ``x``), plus ``z >= z_next`` if given."""
    nb, ng = case.n_bus, case.n_gen
    if len(z) != case.n_components:
        raise ModelBuildError("logic block needs one variable per component")
    rows = []
    if x is not None:
        for d, b in enumerate(case.load_bus()):
            rows.append(model.add_constraint([(z[b], 1.0), (x[d], -1.0)], ">=", 0.0,
                                             f"load_logic{tag}[{d}]"))
    for g, b in enumerate(case.gen_bus()):
        rows.append(model.add_constraint([(z[b], 1.0), (z[nb + g], -1.0)], ">=", 0.0,
                                         f"gen_logic{tag}[{g}]"))
    for l, (i, j) in enumerate(case.line_ends()):
        for b, side in ((i, "f"), (j, "t")):
            rows.append(model.add_constraint([(z[b], 1.0), (z[nb + ng + l], -1.0)], ">=", 0.0,
                                             f"line_logic_{side}{tag}[{l}]"))
    if z_next is not None:
        for c in range(case.n_components):
            rows.append(model.add_constraint([(z[c], 1.0), (z_next[c], -1.0)], ">=", 0.0,
                                             f"monotone{tag}[{c}]"))
    return rows


@dataclass
class FirstStageVars:
    """``z[t]`` and ``period[t]`` for t = 1..T (index 0 is unused)."""

    z: list
    period: list

    def z_at(self, t: int):
        """Variables of z at period t, or None for t = 0 (everything energized)."""
        return None if t == 0 else self.z[t]


def build_first_stage(model: LinearModel, case: PowerCase) -> FirstStageVars:
    T, C = case.horizon, case.n_components
    z = [None] + [model.add_vars(f"z{t}", C, binary=True) for t in range(1, T + 1)]
    period = [None] + [add_period_vars(model, case, str(t)) for t in range(1, T + 1)]
    for t in range(1, T + 1):
        build_flow_block(model, case, t, period[t], z[t])
        build_logic_block(model, case, z[t], period[t].x, z[t + 1] if t < T else None, str(t))
    return FirstStageVars(z, period)


def shed_terms(case: PowerCase, pv: PeriodVars, weight: float = 1.0):
    """Objective coefficients and constant of ``weight * sum_d w_d (1 - x_d)``."""
    w = case.priorities() * weight
    return [(pv.x[d], -w[d]) for d in range(case.n_load)], float(w.sum())


@dataclass
class ShutoffPlan:
    """First-stage decision. ``z`` has shape (C, T+1) with column 0 all ones."""

    z: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    flow: np.ndarray
    gen: np.ndarray

    def anchor(self, tau: int) -> np.ndarray:
        """State z at period tau-1 (all ones when tau = 1)."""
        return self.z[:, tau - 1].copy()

    def shed(self, case: PowerCase, t_end: int) -> float:
        """sum_{t=1}^{t_end} sum_d w_d (1 - x_dt)."""
        w = case.priorities()
        if t_end <= 0 or not len(w):
            return 0.0
        return float(w @ (1.0 - self.x[:, :t_end]).sum(axis=1))

    def off_count(self, t: int, kind: str | None = None, case: PowerCase | None = None) -> int:
        col = self.z[:, t]
        if kind is None:
            return int((col == 0).sum())
        nb, ng = case.n_bus, case.n_gen
        sl = {"bus": slice(0, nb), "gen": slice(nb, nb + ng), "line": slice(nb + ng, None)}[kind]
        return int((col[sl] == 0).sum())

    def check(self, case: PowerCase, tol: float = 1e-6) -> None:
        """Raise ValidationError unless monotone and logically consistent."""
        z = self.z
        if z.shape != (case.n_components, case.horizon + 1):
            raise ValidationError("plan shape does not match case", field="z")
        if np.any(z[:, 0] != 1):
            raise ValidationError("all components start energized", field="z")
        if np.any(np.diff(z, axis=1) > 0):
            raise ValidationError("plan re-energizes a component", field="z")
        nb, ng = case.n_bus, case.n_gen
        for g, b in enumerate(case.gen_bus()):
            if np.any(z[nb + g] > z[b]):
                raise ValidationError(f"generator {g} on while its bus is off", field="z")
        for l, (i, j) in enumerate(case.line_ends()):
            if np.any(z[nb + ng + l] > np.minimum(z[i], z[j])):
                raise ValidationError(f"line {l} on while an end bus is off", field="z")
        for d, b in enumerate(case.load_bus()):
            if np.any(self.x[d] > z[b, 1:] + tol):
                raise ValidationError(f"load {d} served while its bus is off", field="x")

    def to_dict(self) -> dict:
        return {"z": self.z.astype(int).tolist(), "x": self.x.tolist(),
                "theta": self.theta.tolist(), "flow": self.flow.tolist(), "gen": self.gen.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ShutoffPlan":
        try:
            return cls(z=np.array(doc["z"], dtype=int), x=np.array(doc["x"], dtype=float),
                       theta=np.array(doc["theta"], dtype=float),
                       flow=np.array(doc["flow"], dtype=float), gen=np.array(doc["gen"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed plan: {exc!r}") from exc

    def save(self, path, meta: dict | None = None) -> None:
        doc = {"plan": self.to_dict()}
        if meta:
            doc.update(meta)
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))

    @classmethod
    def load(cls, path):
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read plan {path}: {exc}") from exc
        return cls.from_dict(doc["plan"] if "plan" in doc else doc), doc


def extract_plan(case: PowerCase, fs: FirstStageVars, sol) -> ShutoffPlan:
    T, C = case.horizon, case.n_components
    sol = np.asarray(sol)
    z = np.ones((C, T + 1), dtype=int)
    cols = {k: np.zeros((n, T)) for k, n in
            (("x", case.n_load), ("theta", case.n_bus), ("flow", case.n_line), ("gen", case.n_gen))}
    for t in range(1, T + 1):
        z[:, t] = np.rint(sol[fs.z[t]]).astype(int) if C else []
        pv = fs.period[t]
        for k in cols:
            idx = getattr(pv, k)
            if idx:
                cols[k][:, t - 1] = sol[idx]
    cols["x"] = np.clip(cols["x"], 0.0, 1.0)
    return ShutoffPlan(z=z, **cols)


def plan_hint(fs: FirstStageVars, plan: ShutoffPlan) -> dict:
    """Variable-value hints that reproduce ``plan`` in a model built with ``fs``."""
    hints = {}
    for t in range(1, len(fs.z)):
        for c, j in enumerate(fs.z[t]):
            hints[j] = float(plan.z[c, t])
        pv = fs.period[t]
        for key in ("x", "theta", "flow", "gen"):
            vals = getattr(plan, key)[:, t - 1]
            for j, v in zip(getattr(pv, key), vals):
                hints[j] = float(v)
    return hints
