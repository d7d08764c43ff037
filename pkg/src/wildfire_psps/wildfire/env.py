"""Environmental layers and the three event probabilities of the simulator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..case_model import PowerCase
from ..errors import ParseError, ValidationError
from ..geo_grid import CellMaps, GridGeometry
from ._kernel_py import OFFSETS

RASTER_COLUMNS = ("col", "row", "fuel", "q0", "veg", "den", "slope")


@dataclass(frozen=True)
class EnvLayers:
    """Per-cell arrays indexed ``[row, col]`` plus the per-period wind factors.

    ``wind[t, slot]`` is the directional factor for spreading along
    ``OFFSETS[slot]`` in period t (row 0 unused); all ones means calm.
    """

    fuel: np.ndarray
    q0: np.ndarray
    veg: np.ndarray
    den: np.ndarray
    slope: np.ndarray
    wind: np.ndarray

    def __post_init__(self):
        if np.any((self.q0 < 0) | (self.q0 > 1)):
            raise ValidationError("q0 must lie in [0, 1]", field="q0")

    @property
    def shape(self):
        return self.fuel.shape

    def base_q(self) -> np.ndarray:
        """Direction-free part of the spread probability (unclamped)."""
        return self.q0 * (1.0 + self.veg) * (1.0 + self.den) * self.slope

    def with_spread(self, q: float) -> "EnvLayers":
        """Uniform spread probability ``q`` everywhere, calm wind."""
        shape = self.fuel.shape
        return EnvLayers(self.fuel, np.full(shape, q), np.zeros(shape), np.zeros(shape),
                         np.ones(shape), np.ones_like(self.wind))


def wind_factor(speed: float, toward_deg: float, slot: int, c1: float = 0.045,
                c2: float = 0.131) -> float:
    """exp(c1 V) exp(V c2 (cos(theta) - 1)), theta between wind and spread direction."""
    dr, dc = OFFSETS[slot]
    spread_az = math.degrees(math.atan2(dc, dr))  # clockwise from north; rows grow northward
    theta = math.radians(spread_az - toward_deg)
    return math.exp(c1 * speed) * math.exp(speed * c2 * (math.cos(theta) - 1.0))


def wind_table(case: PowerCase) -> np.ndarray:
    env = case.environment
    table = np.ones((case.horizon + 1, 8))
    for rec in env.wind:
        if not 1 <= rec.period <= case.horizon:
            raise ValidationError(f"wind period {rec.period} outside horizon", field="wind")
        for slot in range(8):
            table[rec.period, slot] = wind_factor(rec.speed, rec.toward_deg, slot,
                                                  env.wind_c1, env.wind_c2)
    return table


def read_raster(path, geom: GridGeometry) -> dict[str, np.ndarray]:
    """CSV with header ``col,row,fuel,q0,veg,den,slope``; absent cells keep defaults."""
    layers = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in RASTER_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise ParseError(f"{path}: raster missing columns {missing}")
            for name in RASTER_COLUMNS[2:]:
                layers[name] = {}
            for rec in reader:
                col, row = int(rec["col"]), int(rec["row"])
                if not geom.contains((col, row)):
                    raise ValidationError(f"raster cell ({col},{row}) outside grid", field="raster")
                for name in RASTER_COLUMNS[2:]:
                    layers[name][(row, col)] = float(rec[name])
    except OSError as exc:
        raise ParseError(f"cannot read raster {path}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: bad raster value ({exc})") from exc
    return layers


def build_env(case: PowerCase, geom: GridGeometry, raster=None) -> EnvLayers:
    env = case.environment
    shape = (geom.n_rows, geom.n_cols)
    arrays = {
        "fuel": np.ones(shape),
        "q0": np.full(shape, env.q0),
        "veg": np.full(shape, env.veg),
        "den": np.full(shape, env.den),
        "slope": np.full(shape, env.slope),
    }
    if raster is None and env.raster:
        raster = Path(case.source_dir or ".") / env.raster
    if raster is not None:
        for name, cells in read_raster(raster, geom).items():
            for (row, col), value in cells.items():
                arrays[name][row, col] = value
    return EnvLayers(fuel=arrays["fuel"] > 0.5, q0=arrays["q0"], veg=arrays["veg"],
                     den=arrays["den"], slope=arrays["slope"], wind=wind_table(case))


def write_raster(env: EnvLayers, path) -> None:
    rows, cols = env.shape
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RASTER_COLUMNS)
        for r in range(rows):
            for c in range(cols):
                w.writerow([c, r, int(env.fuel[r, c]), repr(float(env.q0[r, c])),
                            repr(float(env.veg[r, c])), repr(float(env.den[r, c])),
                            repr(float(env.slope[r, c]))])


def spread_prob(env: EnvLayers, t: int, k, slot: int | None = None) -> float:
    """Probability that a burning neighbour ignites cell ``k = (col, row)`` in period t.

    ``slot`` selects the spread direction for the wind factor; None means no wind.
    """
    col, row = k
    q = float(env.q0[row, col] * (1 + env.veg[row, col]) * (1 + env.den[row, col])
              * env.slope[row, col])
    if slot is not None:
        q *= float(env.wind[t, slot])
    return min(max(q, 0.0), 1.0)


def ignition_prob(case: PowerCase, maps: CellMaps, k: int) -> float:
    """WFPI share of the lines crossing flat cell ``k``."""
    total = sum(l.wfpi for l in case.lines)
    if total <= 0:
        raise ValidationError("total WFPI is zero", field="wfpi")
    return sum(case.lines[l].wfpi for l in maps.cell_lines.get(k, ())) / total


def ignition_field(case: PowerCase, geom: GridGeometry, maps: CellMaps,
                   scale: float | None = None) -> np.ndarray:
    """Per-period exogenous ignition probability per cell, ``scale`` times the WFPI share."""
    if scale is None:
        scale = case.environment.ignition_scale
    field = np.zeros((geom.n_rows, geom.n_cols))
    if scale == 0 or not case.lines:
        return field
    for k in maps.cells_with_line:
        col, row = geom.unflat(k)
        field[row, col] = min(1.0, scale * ignition_prob(case, maps, k))
    return field


def fault_prob(rate: float) -> float:
    """Per-period fault probability of a line with hourly failure rate ``rate``."""
    if rate < 0:
        raise ValidationError("fault rate must be nonnegative", field="fault_rate")
    return -math.expm1(-rate)


def no_disruption_probability(case: PowerCase, geom: GridGeometry, maps: CellMaps,
                              env: EnvLayers, scale: float | None = None) -> float:
    """Exact probability that a horizon passes with no ignition and no fault."""
    field = ignition_field(case, geom, maps, scale)
    p = field[env.fuel]
    if np.any(p >= 1):
        return 0.0
    log_quiet = case.horizon * np.log1p(-p).sum()
    for rate in case.line_fault_rates():
        log_quiet -= case.horizon * rate
    return float(math.exp(log_quiet))


def calibrate_ignition_scale(case: PowerCase, geom: GridGeometry, maps: CellMaps,
                             env: EnvLayers, disruption_rate: float) -> float:
    """Ignition scale at which a fraction ``disruption_rate`` of horizons see a disruption."""
    from scipy.optimize import brentq

    target = 1.0 - disruption_rate
    if no_disruption_probability(case, geom, maps, env, 0.0) <= target:
        raise ValidationError("faults alone exceed the requested disruption rate",
                              field="disruption_rate")
    shares = ignition_field(case, geom, maps, 1.0)[env.fuel]
    hi = 1.0 / shares.max()

    def excess(s):
        return no_disruption_probability(case, geom, maps, env, s) - target

    if excess(hi * (1 - 1e-12)) > 0:
        raise ValidationError("disruption rate unreachable by ignition alone",
                              field="disruption_rate")
    return brentq(excess, 0.0, hi * (1 - 1e-12), xtol=1e-14, rtol=1e-14)
