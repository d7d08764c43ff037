"""Solver-agnostic linear model description and solve results."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelBuildError

INF = math.inf


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT = "limit"


@dataclass
class SolveResult:
    status: Status
    objective: float = math.nan
    x: np.ndarray | None = None
    gap: float = math.nan
    bound: float = math.nan
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class Limits:
    gap: float = 1e-6
    time: float = math.inf
    seed: int = 0
    abs_gap: float = 1e-9


@dataclass
class LinearModel:
    """Minimize ``c @ x + constant`` subject to ranged rows ``lo <= A x <= hi``.

    Variables are referenced by integer index; names are only for export and
    debugging.
    """

    name: str = "model"
    names: list = field(default_factory=list)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    binary: list = field(default_factory=list)
    row_index: list = field(default_factory=list)
    row_coef: list = field(default_factory=list)
    row_lower: list = field(default_factory=list)
    row_upper: list = field(default_factory=list)
    row_names: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    constant: float = 0.0
    hints: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.row_lower)

    def add_var(self, name: str, lower: float = 0.0, upper: float = INF,
                binary: bool = False) -> int:
        if binary:
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        if lower > upper:
            raise ModelBuildError(f"variable {name}: lower bound above upper bound")
        self.names.append(name)
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.binary.append(bool(binary))
        return len(self.names) - 1

    def add_vars(self, prefix: str, n: int, lower=0.0, upper=INF, binary=False) -> list[int]:
        return [self.add_var(f"{prefix}[{i}]", lower, upper, binary) for i in range(n)]

    def add_constraint(self, coeffs, sense: str, rhs: float, name: str | None = None) -> int:
        """``coeffs`` is a mapping or iterable of ``(var, coef)``; sense in <=, >=, ==."""
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        merged: dict[int, float] = {}
        for j, a in items:
            if j is None or not 0 <= j < self.n_vars:
                raise ModelBuildError(f"constraint {name or self.n_rows}: unknown variable {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        if sense == "<=":
            lo, hi = -INF, rhs
        elif sense == ">=":
            lo, hi = rhs, INF
        elif sense == "==":
            lo = hi = rhs
        else:
            raise ModelBuildError(f"unknown constraint sense {sense!r}")
        self.row_index.append(np.fromiter(merged.keys(), dtype=np.int64, count=len(merged)))
        self.row_coef.append(np.fromiter(merged.values(), dtype=float, count=len(merged)))
        self.row_lower.append(float(lo))
        self.row_upper.append(float(hi))
        self.row_names.append(name or f"r{self.n_rows}")
        return self.n_rows - 1

    def set_objective(self, coeffs, constant: float = 0.0) -> None:
        self.objective = {}
        self.add_objective(coeffs)
        self.constant = float(constant)

    def add_objective(self, coeffs, constant: float = 0.0) -> None:
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for j, a in items:
            if not 0 <= j < self.n_vars:
                raise ModelBuildError(f"objective: unknown variable {j}")
            self.objective[j] = self.objective.get(j, 0.0) + float(a)
        self.constant += float(constant)

    def fix(self, j: int, value: float) -> None:
        self.lower[j] = self.upper[j] = float(value)

    # -- compiled views -------------------------------------------------------

    def cost_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for j, a in self.objective.items():
            c[j] = a
        return c

    def csr(self):
        """Row-wise sparse matrix as ``(start, index, value)``."""
        start = np.zeros(self.n_rows + 1, dtype=np.int64)
        if self.n_rows:
            start[1:] = np.cumsum([len(ix) for ix in self.row_index])
            index = np.concatenate(self.row_index) if start[-1] else np.zeros(0, dtype=np.int64)
            value = np.concatenate(self.row_coef) if start[-1] else np.zeros(0)
        else:
            index, value = np.zeros(0, dtype=np.int64), np.zeros(0)
        return start, index, value

    def evaluate(self, x) -> float:
        return self.constant + sum(a * x[j] for j, a in self.objective.items())

    def violation(self, x) -> float:
        """Largest bound or row violation of point ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        worst = max(worst, float(np.max(np.asarray(self.lower) - x, initial=0.0)))
        worst = max(worst, float(np.max(x - np.asarray(self.upper), initial=0.0)))
        for ix, a, lo, hi in zip(self.row_index, self.row_coef, self.row_lower, self.row_upper):
            v = float(a @ x[ix])
            worst = max(worst, lo - v, v - hi)
        return worst

    def to_lp(self) -> str:
        """CPLEX LP text, for debugging with external tools."""

        def term_list(pairs):
            out = []
            for j, a in pairs:
                if a == 0:
                    continue
                sign = "-" if a < 0 else "+"
                out.append(f"{sign} {abs(a):.12g} {_lp_name(self.names[j], j)}")
            return " ".join(out) or "0 " + _lp_name(self.names[0], 0) if self.n_vars else "0"

        lines = [f"\\ {self.name}", "Minimize", " obj: " + term_list(sorted(self.objective.items()))]
        if self.constant:
            lines[-1] += f" + {self.constant:.12g} __const"
        lines.append("Subject To")
        for i, (ix, a, lo, hi) in enumerate(zip(self.row_index, self.row_coef,
                                                self.row_lower, self.row_upper)):
            expr = term_list(zip(ix.tolist(), a.tolist()))
            name = _lp_name(self.row_names[i], i, "r")
            if lo == hi:
                lines.append(f" {name}: {expr} = {hi:.12g}")
            else:
                if hi < INF:
                    lines.append(f" {name}_u: {expr} <= {hi:.12g}")
                if lo > -INF:
                    lines.append(f" {name}_l: {expr} >= {lo:.12g}")
        lines.append("Bounds")
        if self.constant:
            lines.append(" __const = 1")
        for j in range(self.n_vars):
            lo, hi = self.lower[j], self.upper[j]
            nm = _lp_name(self.names[j], j)
            if lo == -INF and hi == INF:
                lines.append(f" {nm} free")
            else:
                lo_s = "-inf" if lo == -INF else f"{lo:.12g}"
                hi_s = "+inf" if hi == INF else f"{hi:.12g}"
                lines.append(f" {lo_s} <= {nm} <= {hi_s}")
        bins = [_lp_name(self.names[j], j) for j in range(self.n_vars) if self.binary[j]]
        if bins:
            lines.append("Binary")
            lines.extend(" " + b for b in bins)
        lines.append("End")
        return "\n".join(lines) + "\n"


def _lp_name(name: str, j: int, prefix: str = "x") -> str:
    safe = "".join(ch if ch.isalnum() or ch in "_." else "_" for ch in name)
    return safe if safe and not safe[0].isdigit() else f"{prefix}{j}_{safe}"
