"""Single-MILP formulations over a whole scenario set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..case_model import PowerCase
from ..errors import ModelBuildError, SolverError
from . import backends
from .blocks import FirstStageVars, build_first_stage, extract_plan, shed_terms
from .model import Limits, LinearModel, SolveResult
from .second_stage import SecondStageBlock, build_second_stage_block

EXTENSIVE_LIMITS = Limits(gap=1e-2)
MODES = ("expectation", "epigraph_worst_case")


@dataclass
class ExtensiveForm:
    model: LinearModel
    first_stage: FirstStageVars
    blocks: dict
    epigraph: int | None = None


def shed_weights(case: PowerCase, scenarios) -> np.ndarray:
    """c_t = P(no disruption up to and including period t), for t = 1..T."""
    T = case.horizon
    c = np.zeros(T + 1)
    for s in scenarios:
        c[1:s.tau_index(T)] += s.probability
    return c


def state_vars(model: LinearModel, case: PowerCase, fs: FirstStageVars, t: int, cache: dict):
    """Variables holding z at period t; period 0 gets fixed ones created once."""
    if t > 0:
        return fs.z[t]
    if 0 not in cache:
        cache[0] = model.add_vars("z0", case.n_components, 1.0, 1.0)
    return cache[0]


def build_extensive(case: PowerCase, scenarios, objective_mode: str = "expectation") -> ExtensiveForm:
    scenarios = list(scenarios)
    if not scenarios:
        raise ModelBuildError("extensive form needs at least one scenario")
    if objective_mode not in MODES:
        raise ModelBuildError(f"unknown objective mode {objective_mode!r}")
    m = LinearModel(name=f"extensive_{objective_mode}")
    fs = build_first_stage(m, case)
    T = case.horizon
    zero_state: dict = {}
    blocks: dict[int, SecondStageBlock] = {}
    if objective_mode == "expectation":
        weights = shed_weights(case, scenarios)
        for t in range(1, T + 1):
            if weights[t]:
                terms, const = shed_terms(case, fs.period[t], weights[t])
                m.add_objective(terms, const)
        for i, s in enumerate(scenarios):
            if not s.disruptive or s.probability == 0:
                continue
            zc = state_vars(m, case, fs, s.tau - 1, zero_state)
            blk = build_second_stage_block(m, case, s, zc=zc, tag=f"s{i}")
            blocks[i] = blk
            m.add_objective([(j, s.probability * a) for j, a in blk.obj],
                            s.probability * blk.constant)
        return ExtensiveForm(m, fs, blocks)
    theta = m.add_var("worst", 0.0)
    m.set_objective({theta: 1.0})
    for i, s in enumerate(scenarios):
        terms, const = [], 0.0
        for t in range(1, s.tau_index(T)):
            tt, cc = shed_terms(case, fs.period[t])
            terms += tt
            const += cc
        if s.disruptive:
            zc = state_vars(m, case, fs, s.tau - 1, zero_state)
            blk = build_second_stage_block(m, case, s, zc=zc, tag=f"s{i}")
            blocks[i] = blk
            terms += blk.obj
            const += blk.constant
        # theta >= const + terms
        m.add_constraint([(theta, 1.0)] + [(j, -a) for j, a in terms], ">=", const,
                         f"epigraph[{i}]")
    return ExtensiveForm(m, fs, blocks, epigraph=theta)


def solve_extensive(case: PowerCase, scenarios, objective_mode: str = "expectation",
                    limits: Limits | None = None, backend: str | None = None,
                    hints: dict | None = None):
    """Returns ``(plan, SolveResult, ExtensiveForm)``."""
    ext = build_extensive(case, scenarios, objective_mode)
    if hints:
        ext.model.hints = hints
    res: SolveResult = backends.solve(ext.model, limits or EXTENSIVE_LIMITS, backend)
    if not res.ok or res.x is None:
        raise SolverError(f"extensive form ended with status {res.status.value}")
    return extract_plan(case, ext.first_stage, res.x), res, ext
