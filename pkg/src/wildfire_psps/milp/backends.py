"""MILP/QP backends.

``highs`` keeps a persistent ``highspy.Highs`` instance per model so repeated
solves that only change costs or bounds reuse the loaded problem and accept a
warm start. ``scipy`` goes through ``scipy.optimize.milp`` and rebuilds every
time. The default can be set with ``WILDFIRE_PSPS_SOLVER``.
"""

from __future__ import annotations

import math
import os
import time

import numpy as np

from ..errors import LimitReached, SolverError
from .model import INF, Limits, LinearModel, SolveResult, Status

try:
    import highspy

    _HIGHS_INF = highspy.kHighsInf
except ImportError:  # pragma: no cover - highspy is a declared dependency
    highspy = None
    _HIGHS_INF = 1e30

BACKENDS = ("highs", "scipy")


def default_backend() -> str:
    name = os.environ.get("WILDFIRE_PSPS_SOLVER", "highs").lower()
    if name not in BACKENDS:
        raise SolverError(f"unknown solver backend {name!r}; choose from {BACKENDS}")
    if name == "highs" and highspy is None:
        return "scipy"
    return name


def _clip(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.clip(a, -_HIGHS_INF, _HIGHS_INF)


class HighsSession:
    """A model loaded once into HiGHS; costs, bounds and rows may be edited in place."""

    def __init__(self, model: LinearModel):
        if highspy is None:
            raise SolverError("highspy is not installed")
        self.n = model.n_vars
        self.integer = bool(any(model.binary))
        self.constant = model.constant
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        c = model.cost_vector()
        h.addCols(self.n, c, _clip(model.lower), _clip(model.upper), 0,
                  np.zeros(0, dtype=np.int32), np.zeros(0, dtype=np.int32), np.zeros(0))
        if model.n_rows:
            start, index, value = model.csr()
            h.addRows(model.n_rows, _clip(model.row_lower), _clip(model.row_upper), len(index),
                      start[:-1].astype(np.int32), index.astype(np.int32), value)
        if self.integer:
            bins = np.flatnonzero(model.binary).astype(np.int32)
            h.changeColsIntegrality(len(bins), bins,
                                    np.full(len(bins), highspy.HighsVarType.kInteger))
        if self.constant:
            h.changeObjectiveOffset(self.constant)
        self.h = h
        self._hint = None

    # -- edits ----------------------------------------------------------------

    def set_costs(self, c, constant: float | None = None) -> None:
        c = np.asarray(c, dtype=float)
        idx = np.arange(self.n, dtype=np.int32)
        self.h.changeColsCost(self.n, idx, c)
        if constant is not None:
            self.constant = float(constant)
            self.h.changeObjectiveOffset(self.constant)

    def set_bounds(self, idx, lower, upper) -> None:
        idx = np.asarray(idx, dtype=np.int32)
        self.h.changeColsBounds(len(idx), idx, _clip(lower), _clip(upper))

    def add_row(self, idx, coef, lower=-INF, upper=INF) -> None:
        idx = np.asarray(idx, dtype=np.int32)
        self.h.addRow(float(np.clip(lower, -_HIGHS_INF, _HIGHS_INF)),
                      float(np.clip(upper, -_HIGHS_INF, _HIGHS_INF)), len(idx), idx,
                      np.asarray(coef, dtype=float))

    def add_col(self, cost, lower, upper) -> int:
        self.h.addCol(float(cost), float(max(lower, -_HIGHS_INF)), float(min(upper, _HIGHS_INF)),
                      0, np.zeros(0, dtype=np.int32), np.zeros(0))
        self.n += 1
        return self.n - 1

    def set_hessian_diagonal(self, diag) -> None:
        """Quadratic term ``0.5 * sum(diag[j] * x_j^2)``; columns with zero are linear."""
        diag = np.asarray(diag, dtype=float)
        nz = np.flatnonzero(diag)
        start = np.zeros(self.n, dtype=np.int32)
        # triangular column format: one diagonal entry per listed column
        counts = np.zeros(self.n, dtype=np.int32)
        counts[nz] = 1
        start[1:] = np.cumsum(counts)[:-1]
        self.h.passHessian(self.n, len(nz), highspy.HessianFormat.kTriangular, start,
                           nz.astype(np.int32), diag[nz])

    def hint(self, x) -> None:
        self._hint = None if x is None else np.asarray(x, dtype=float)

    # -- solve ----------------------------------------------------------------

    def solve(self, limits: Limits | None = None) -> SolveResult:
        limits = limits or Limits()
        h = self.h
        h.setOptionValue("mip_rel_gap", float(limits.gap))
        h.setOptionValue("mip_abs_gap", float(limits.abs_gap))
        h.setOptionValue("random_seed", int(limits.seed))
        h.setOptionValue("time_limit", float(limits.time) if math.isfinite(limits.time) else _HIGHS_INF)
        if self.integer and self._hint is not None and len(self._hint) == self.n:
            sol = highspy.HighsSolution()
            sol.col_value = list(self._hint)
            sol.value_valid = True
            h.setSolution(sol)
        t0 = time.perf_counter()
        run_status = h.run()
        wall = time.perf_counter() - t0
        if run_status == highspy.HighsStatus.kError:
            raise SolverError("HiGHS reported an error")
        ms = h.getModelStatus()
        S = highspy.HighsModelStatus
        info = h.getInfo()
        has_primal = info.primal_solution_status == 2
        x = np.array(h.getSolution().col_value) if has_primal else None
        obj = info.objective_function_value if has_primal else math.nan
        if self.integer:
            bound = info.mip_dual_bound
            gap = info.mip_gap
        else:
            bound, gap = obj, 0.0
        if ms == S.kOptimal:
            status = Status.OPTIMAL
        elif ms == S.kInfeasible:
            status = Status.INFEASIBLE
        elif ms in (S.kUnbounded, S.kUnboundedOrInfeasible):
            status = Status.UNBOUNDED
        elif ms in (S.kTimeLimit, S.kIterationLimit, S.kSolutionLimit, S.kObjectiveBound,
                    S.kObjectiveTarget, S.kInterrupt):
            status = Status.FEASIBLE if has_primal else Status.LIMIT
        elif ms == S.kModelEmpty:
            status, obj, x, bound, gap = Status.OPTIMAL, self.constant, np.zeros(self.n), self.constant, 0.0
        else:
            raise SolverError(f"HiGHS returned status {h.modelStatusToString(ms)}")
        if self.integer and x is not None:
            self._hint = x
        return SolveResult(status=status, objective=float(obj), x=x, gap=float(gap),
                           bound=float(bound), wall_time=wall)


def _solve_scipy(model: LinearModel, limits: Limits) -> SolveResult:
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import csr_matrix

    n = model.n_vars
    c = model.cost_vector()
    constraints = []
    if model.n_rows:
        start, index, value = model.csr()
        A = csr_matrix((value, index, start), shape=(model.n_rows, n))
        constraints.append(LinearConstraint(A, np.asarray(model.row_lower), np.asarray(model.row_upper)))
    options = {"mip_rel_gap": float(limits.gap), "disp": False}
    if math.isfinite(limits.time):
        options["time_limit"] = float(limits.time)
    t0 = time.perf_counter()
    res = milp(c, integrality=np.asarray(model.binary, dtype=int),
               bounds=Bounds(np.asarray(model.lower), np.asarray(model.upper)),
               constraints=constraints, options=options)
    wall = time.perf_counter() - t0
    x = None if res.x is None else np.asarray(res.x)
    obj = math.nan if x is None else float(c @ x + model.constant)
    bound = getattr(res, "mip_dual_bound", None)
    bound = obj if bound is None or not np.isfinite(bound) else float(bound) + model.constant
    gap = getattr(res, "mip_gap", 0.0) or 0.0
    if res.status == 0:
        status = Status.OPTIMAL
    elif res.status == 1:
        status = Status.FEASIBLE if x is not None else Status.LIMIT
    elif res.status == 2:
        status = Status.INFEASIBLE
    elif res.status == 3:
        status = Status.UNBOUNDED
    else:
        raise SolverError(f"scipy milp failed: {res.message}")
    return SolveResult(status=status, objective=obj, x=x, gap=float(gap), bound=bound, wall_time=wall)


def solve(model: LinearModel, limits: Limits | None = None, backend: str | None = None,
          raise_on_limit: bool = False) -> SolveResult:
    """Solve ``model`` once.

    With ``raise_on_limit`` a time/iteration stop raises ``LimitReached``
    carrying the incumbent instead of returning a FEASIBLE/LIMIT result.
    """
    limits = limits or Limits()
    backend = backend or default_backend()
    if model.n_vars == 0:
        return SolveResult(Status.OPTIMAL, model.constant, np.zeros(0), 0.0, model.constant)
    if backend == "highs":
        session = HighsSession(model)
        if model.hints:
            x0 = np.array([model.hints.get(j, model.lower[j] if math.isfinite(model.lower[j]) else 0.0)
                           for j in range(model.n_vars)])
            session.hint(x0)
        result = session.solve(limits)
    elif backend == "scipy":
        result = _solve_scipy(model, limits)
    else:
        raise SolverError(f"unknown solver backend {backend!r}")
    if raise_on_limit and result.status in (Status.FEASIBLE, Status.LIMIT) and \
            not (result.status == Status.FEASIBLE and result.gap <= limits.gap):
        raise LimitReached("solver stopped at a limit", incumbent=result, gap=result.gap)
    return result


def session(model: LinearModel, backend: str | None = None):
    """A re-solvable handle: ``HighsSession`` or a rebuild-per-solve scipy stand-in."""
    backend = backend or default_backend()
    if backend == "highs":
        return HighsSession(model)
    return ScipySession(model)


class ScipySession:
    """Same interface as ``HighsSession`` but rebuilds the scipy problem per solve."""

    def __init__(self, model: LinearModel):
        import copy

        self.model = copy.deepcopy(model)
        self.n = model.n_vars
        self.integer = bool(any(model.binary))

    def set_costs(self, c, constant=None):
        self.model.objective = {j: float(a) for j, a in enumerate(np.asarray(c)) if a != 0}
        if constant is not None:
            self.model.constant = float(constant)

    def set_bounds(self, idx, lower, upper):
        for j, lo, hi in zip(np.asarray(idx), np.broadcast_to(lower, len(idx)),
                             np.broadcast_to(upper, len(idx))):
            self.model.lower[int(j)] = float(lo)
            self.model.upper[int(j)] = float(hi)

    def add_row(self, idx, coef, lower=-INF, upper=INF):
        m = self.model
        m.row_index.append(np.asarray(idx, dtype=np.int64))
        m.row_coef.append(np.asarray(coef, dtype=float))
        m.row_lower.append(float(lower))
        m.row_upper.append(float(upper))
        m.row_names.append(f"r{m.n_rows}")

    def add_col(self, cost, lower, upper):
        j = self.model.add_var(f"c{self.n}", lower, upper)
        if cost:
            self.model.objective[j] = float(cost)
        self.n += 1
        return j

    def hint(self, x):
        pass

    def set_hessian_diagonal(self, diag):
        raise SolverError("the scipy backend has no QP support")

    def solve(self, limits=None):
        return _solve_scipy(self.model, limits or Limits())
