"""Exogenous and endogenous wildfire simulation producing disruption scenarios."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..case_model import PowerCase
from ..geo_grid import CellMaps, GridGeometry, component_cells
from . import kernel, rng
from .env import EnvLayers, fault_prob, ignition_field
from .scenario import DisruptionScenario


@dataclass
class ExogenousResult:
    fire_period: np.ndarray
    v: frozenset
    first_ignition: int | None


@dataclass
class EndogenousResult:
    u: frozenset
    fire_sets: dict
    fault_period: dict
    first_fault: int | None


class Simulator:
    """Binds a case to its grid and environment.

    ``exogenous`` / ``endogenous`` switch the two fire sources off, which is
    how the exo-only and endo-only scenario sets are produced.
    """

    def __init__(self, case: PowerCase, geom: GridGeometry, maps: CellMaps, env: EnvLayers,
                 exogenous: bool = True, endogenous: bool = True, backend: str | None = None):
        self.case = case
        self.geom = geom
        self.maps = maps
        self.env = env
        self.backend = backend
        self.shape = (geom.n_rows, geom.n_cols)
        self.ign = ignition_field(case, geom, maps) if exogenous else np.zeros(self.shape)
        rates = case.line_fault_rates() if endogenous else np.zeros(case.n_line)
        self.line_fault_p = np.array([fault_prob(r) for r in rates])
        self.base_q = env.base_q()
        self.comp_cells = component_cells(case, maps)
        # (row, col) arrays per component for fast damage checks
        self._rc = [(np.array([k // geom.n_cols for k in cells]),
                     np.array([k % geom.n_cols for k in cells])) for cells in self.comp_cells]

    def _damaged(self, fire_period: np.ndarray) -> frozenset:
        on_fire = fire_period >= 0
        return frozenset(c for c, (r, k) in enumerate(self._rc) if on_fire[r, k].any())

    def propagate(self, fire_period, key, t_start, t_end, exogenous_ignition=False):
        return kernel.propagate(fire_period, self.env.fuel, self.base_q, self.env.wind,
                                self.ign if exogenous_ignition else None, key, t_start, t_end,
                                backend=self.backend)

    def simulate_exogenous(self, stream: rng.RngStream) -> ExogenousResult:
        fire = np.full(self.shape, -1, dtype=np.int32)
        if self.ign.any():
            fire = self.propagate(fire, stream.key(rng.EXOGENOUS), 1, self.case.horizon,
                                  exogenous_ignition=True)
        lit = fire[fire >= 0]
        first = int(lit.min()) if lit.size else None
        return ExogenousResult(fire, self._damaged(fire), first)

    def spread_from(self, component: int, t0: int, stream: rng.RngStream) -> np.ndarray:
        """Independent automaton seeded by the cells of ``component`` ignited in period t0."""
        fire = np.full(self.shape, -1, dtype=np.int32)
        for k in self.comp_cells[component]:
            fire[k // self.geom.n_cols, k % self.geom.n_cols] = t0
        if t0 < self.case.horizon:
            fire = self.propagate(fire, stream.key(rng.ENDOGENOUS, component), t0 + 1,
                                  self.case.horizon)
        return fire

    def fault_periods(self, stream: rng.RngStream) -> dict:
        """First fault period of every line that faults within the horizon."""
        out = {}
        key = stream.key(rng.FAULT)
        offset = self.case.n_bus + self.case.n_gen
        lines = np.flatnonzero(self.line_fault_p > 0)
        if not lines.size:
            return out
        T = self.case.horizon
        for t in range(1, T + 1):
            u = rng.uniform_array(key, t, lines, 0, max(self.case.n_line, 1))
            for li in lines[u < self.line_fault_p[lines]]:
                out.setdefault(offset + int(li), t)
        return out

    def simulate_endogenous(self, stream: rng.RngStream, forced_faults: dict | None = None,
                            only: set | None = None) -> EndogenousResult:
        """Step 1 samples faults, step 2 runs one automaton per faulted component.

        ``forced_faults`` maps component -> period and replaces sampling;
        ``only`` restricts step 2 to a subset (each automaton is independent).
        """
        periods = dict(forced_faults) if forced_faults is not None else self.fault_periods(stream)
        if only is not None:
            periods = {c: t for c, t in periods.items() if c in only}
        fire_sets = {}
        for c, t0 in sorted(periods.items()):
            fire_sets[c] = self._damaged(self.spread_from(c, t0, stream)) | {c}
        first = min(periods.values()) if periods else None
        return EndogenousResult(frozenset(periods), fire_sets, periods, first)

    def scenario(self, seed: int, index: int, probability: float = 1.0) -> DisruptionScenario:
        stream = rng.RngStream(seed, index)
        exo = self.simulate_exogenous(stream)
        endo = self.simulate_endogenous(stream)
        times = [t for t in (exo.first_ignition, endo.first_fault) if t is not None]
        tau = min(times) if times else None
        return DisruptionScenario(tau=tau, v=exo.v, u=endo.u, fire_sets=endo.fire_sets,
                                  probability=probability)

    def generate(self, n: int, seed: int, threads: int = 1, start: int = 0) -> list[DisruptionScenario]:
        if n < 1:
            raise ValueError("scenario count must be >= 1")
        p = 1.0 / n
        indices = range(start, start + n)
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                return list(pool.map(lambda i: self.scenario(seed, i, p), indices))
        return [self.scenario(seed, i, p) for i in indices]


def simulate_exogenous(case, geom, maps, env, stream: rng.RngStream) -> ExogenousResult:
    return Simulator(case, geom, maps, env).simulate_exogenous(stream)


def simulate_endogenous(case, geom, maps, env, stream: rng.RngStream) -> EndogenousResult:
    return Simulator(case, geom, maps, env).simulate_endogenous(stream)


def generate_scenarios(case, geom, maps, env, n: int, seed: int, exogenous: bool = True,
                       endogenous: bool = True, threads: int = 1) -> list[DisruptionScenario]:
    sim = Simulator(case, geom, maps, env, exogenous=exogenous, endogenous=endogenous)
    return sim.generate(n, seed, threads=threads)
