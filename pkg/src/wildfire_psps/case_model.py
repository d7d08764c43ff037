"""Power network data model and the JSON case-file format.

A case file is a single JSON document with four sections::

    {
      "format": "wildfire-psps-case", "version": 1, "name": "...",
      "network": {
        "base_mva": 100.0,
        "angle_bounds": [-1.5708, 1.5708],
        "buses":      [{"id": "b1", "lat": 34.1, "lon": -118.2}],
        "generators": [{"id": "g1", "bus": "b1", "p_min": 0, "p_max": 100,
                        "fuel": "thermal", "damage_cost": 1000}],
        "lines":      [{"id": "l1", "from": "b1", "to": "b2", "susceptance": 10,
                        "thermal_limit": 80, "length_km": 40, "wfpi": 12.5,
                        "damage_cost": 11.4, "fault_rate": 0.001}],
        "loads":      [{"id": "d1", "bus": "b2", "base_demand": 60, "priority": 500}]
      },
      "costs": {"bus_damage_cost": 50},
      "environment": {"fault_rate": 0.001, "ignition_scale": 1.0, "cell_size": 1000,
                      "q0": 0.58, "veg": 0.0, "den": 0.0, "slope": 1.0,
                      "wind": [{"period": 1, "speed": 5.0, "toward_deg": 90}],
                      "raster": "env.csv"},
      "demand": {"horizon": 24, "peak_periods": [10, 11, 12], "peak_factor": 1.2}
    }

``damage_cost`` (generators, lines), ``fault_rate`` (lines), ``bus_damage_cost``,
``wind`` and ``raster`` are optional. Missing damage costs are filled by
:func:`default_cost_ratings`; a line without ``fault_rate`` uses the
environment-wide rate. Susceptance is a positive magnitude in per unit on
``base_mva``; a closed line carries ``base_mva * b * (theta_from - theta_to)`` MW.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import OutOfRange, ParseError, ValidationError

FORMAT_TAG = "wildfire-psps-case"

# 9am-12pm and 3pm-7pm when period t covers hour [t-1, t)
DEFAULT_PEAK_PERIODS = (10, 11, 12, 16, 17, 18, 19)

FUEL_DAMAGE_COST = {"wind": 50.0, "thermal": 1000.0, "nuclear": 2500.0}
BUS_DAMAGE_COST = 50.0
LINE_COST_PER_KM = 0.285
PRIORITY_RANGE = (50.0, 1000.0)


class ComponentKind(str, enum.Enum):
    BUS = "bus"
    GENERATOR = "generator"
    LINE = "line"


@dataclass(frozen=True, order=True)
class ComponentId:
    kind: ComponentKind
    index: int

    def __str__(self):
        return f"{self.kind.value}:{self.index}"


@dataclass(frozen=True)
class Bus:
    id: str
    lat: float
    lon: float


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    p_min: float
    p_max: float
    fuel: str = "thermal"
    damage_cost: float | None = None


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float
    thermal_limit: float
    length_km: float
    wfpi: float
    damage_cost: float | None = None
    fault_rate: float | None = None


@dataclass(frozen=True)
class Load:
    id: str
    bus: str
    base_demand: float
    priority: float


@dataclass(frozen=True)
class WindRecord:
    period: int
    speed: float
    toward_deg: float


@dataclass(frozen=True)
class EnvironmentConfig:
    """Scalar environment defaults; a raster file overrides the per-cell values."""

    fault_rate: float = 0.0
    ignition_scale: float = 1.0
    cell_size: float = 1000.0
    q0: float = 0.58
    veg: float = 0.0
    den: float = 0.0
    slope: float = 1.0
    wind: tuple[WindRecord, ...] = ()
    wind_c1: float = 0.045
    wind_c2: float = 0.131
    raster: str | None = None


@dataclass(frozen=True)
class PowerCase:
    name: str
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    loads: tuple[Load, ...]
    horizon: int = 24
    peak_periods: frozenset[int] = frozenset(DEFAULT_PEAK_PERIODS)
    peak_factor: float = 1.2
    angle_bounds: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    base_mva: float = 100.0
    bus_damage_cost: float | None = None
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    source_dir: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "loads", tuple(self.loads))
        object.__setattr__(self, "peak_periods", frozenset(int(t) for t in self.peak_periods))
        object.__setattr__(self, "angle_bounds", tuple(float(a) for a in self.angle_bounds))
        _validate(self)
        bus_index = {b.id: i for i, b in enumerate(self.buses)}
        object.__setattr__(self, "_bus_index", bus_index)

    # -- sizes and component enumeration ---------------------------------

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def n_gen(self) -> int:
        return len(self.generators)

    @property
    def n_line(self) -> int:
        return len(self.lines)

    @property
    def n_load(self) -> int:
        return len(self.loads)

    @property
    def n_components(self) -> int:
        return self.n_bus + self.n_gen + self.n_line

    def components(self) -> tuple[ComponentId, ...]:
        """Canonical order: buses, then generators, then lines."""
        out = [ComponentId(ComponentKind.BUS, i) for i in range(self.n_bus)]
        out += [ComponentId(ComponentKind.GENERATOR, i) for i in range(self.n_gen)]
        out += [ComponentId(ComponentKind.LINE, i) for i in range(self.n_line)]
        return tuple(out)

    def component_position(self, cid: ComponentId) -> int:
        if cid.kind is ComponentKind.BUS:
            n, offset = self.n_bus, 0
        elif cid.kind is ComponentKind.GENERATOR:
            n, offset = self.n_gen, self.n_bus
        else:
            n, offset = self.n_line, self.n_bus + self.n_gen
        if not 0 <= cid.index < n:
            raise OutOfRange(f"{cid} out of range")
        return offset + cid.index

    def component_at(self, pos: int) -> ComponentId:
        if pos < 0 or pos >= self.n_components:
            raise OutOfRange(f"component position {pos} out of range")
        if pos < self.n_bus:
            return ComponentId(ComponentKind.BUS, pos)
        if pos < self.n_bus + self.n_gen:
            return ComponentId(ComponentKind.GENERATOR, pos - self.n_bus)
        return ComponentId(ComponentKind.LINE, pos - self.n_bus - self.n_gen)

    def component_label(self, pos: int) -> str:
        cid = self.component_at(pos)
        if cid.kind is ComponentKind.BUS:
            return "bus:" + self.buses[cid.index].id
        if cid.kind is ComponentKind.GENERATOR:
            return "gen:" + self.generators[cid.index].id
        return "line:" + self.lines[cid.index].id

    def position_of_label(self, label: str) -> int:
        kind, _, ident = label.partition(":")
        table = {"bus": (self.buses, 0), "gen": (self.generators, self.n_bus),
                 "line": (self.lines, self.n_bus + self.n_gen)}
        if kind not in table:
            raise ValidationError(f"unknown component label {label!r}", field="label")
        items, offset = table[kind]
        for i, item in enumerate(items):
            if item.id == ident:
                return offset + i
        raise ValidationError(f"component {label!r} not found", field="label")

    def bus_position(self, bus_id: str) -> int:
        return self._bus_index[bus_id]

    # -- per-element derived data ----------------------------------------

    def gen_bus(self) -> np.ndarray:
        return np.array([self._bus_index[g.bus] for g in self.generators], dtype=int)

    def load_bus(self) -> np.ndarray:
        return np.array([self._bus_index[d.bus] for d in self.loads], dtype=int)

    def line_ends(self) -> np.ndarray:
        return np.array([[self._bus_index[l.from_bus], self._bus_index[l.to_bus]]
                         for l in self.lines], dtype=int).reshape(-1, 2)

    def priorities(self) -> np.ndarray:
        return np.array([d.priority for d in self.loads], dtype=float)

    def line_fault_rates(self) -> np.ndarray:
        default = self.environment.fault_rate
        return np.array([default if l.fault_rate is None else l.fault_rate
                         for l in self.lines], dtype=float)

    def damage_costs(self) -> np.ndarray:
        """r_c over the canonical component order.

        Raises ValidationError if any cost is still missing; run
        :func:`default_cost_ratings` first.
        """
        if self.bus_damage_cost is None:
            raise ValidationError("bus damage cost missing", field="bus_damage_cost")
        costs = [self.bus_damage_cost] * self.n_bus
        for g in self.generators:
            if g.damage_cost is None:
                raise ValidationError(f"generator {g.id}: damage cost missing", field="damage_cost")
            costs.append(g.damage_cost)
        for l in self.lines:
            if l.damage_cost is None:
                raise ValidationError(f"line {l.id}: damage cost missing", field="damage_cost")
            costs.append(l.damage_cost)
        return np.array(costs, dtype=float)

    def demand_matrix(self) -> np.ndarray:
        """D[d, t-1] for t = 1..T."""
        scale = np.array([self.peak_factor if t in self.peak_periods else 1.0
                          for t in range(1, self.horizon + 1)])
        base = np.array([d.base_demand for d in self.loads], dtype=float)
        return np.outer(base, scale)

    def with_changes(self, **changes) -> "PowerCase":
        return dataclasses.replace(self, **changes)


def _validate(case: PowerCase) -> None:
    if not case.buses:
        raise ValidationError("case has no buses", field="buses")
    seen = set()
    for kind, items in (("bus", case.buses), ("generator", case.generators),
                        ("line", case.lines), ("load", case.loads)):
        ids = [it.id for it in items]
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise ValidationError(f"duplicate {kind} ids: {sorted(dup)}", field="id")
        seen.update((kind, i) for i in ids)
    bus_ids = {b.id for b in case.buses}
    for b in case.buses:
        if not (math.isfinite(b.lat) and math.isfinite(b.lon)):
            raise ValidationError(f"bus {b.id}: coordinates missing", field="lat")
    for g in case.generators:
        if g.bus not in bus_ids:
            raise ValidationError(f"generator {g.id}: bus {g.bus} not found", field="bus")
        if g.p_min > g.p_max:
            raise ValidationError(f"generator {g.id}: p_min > p_max", field="p_min")
        if g.p_min < 0:
            raise ValidationError(f"generator {g.id}: negative p_min", field="p_min")
        if g.fuel not in FUEL_DAMAGE_COST:
            raise ValidationError(f"generator {g.id}: unknown fuel {g.fuel!r}", field="fuel")
        if g.damage_cost is not None and g.damage_cost < 0:
            raise ValidationError(f"generator {g.id}: negative damage cost", field="damage_cost")
    for l in case.lines:
        for end in (l.from_bus, l.to_bus):
            if end not in bus_ids:
                raise ValidationError(f"line {l.id}: bus {end} not found", field="from")
        if l.from_bus == l.to_bus:
            raise ValidationError(f"line {l.id}: both ends at bus {l.from_bus}", field="to")
        if l.thermal_limit <= 0:
            raise ValidationError(f"line {l.id}: thermal limit must be positive", field="thermal_limit")
        if l.susceptance <= 0:
            raise ValidationError(f"line {l.id}: susceptance must be positive", field="susceptance")
        if l.wfpi < 0:
            raise ValidationError(f"line {l.id}: negative wfpi", field="wfpi")
        if l.length_km < 0:
            raise ValidationError(f"line {l.id}: negative length", field="length_km")
        if l.fault_rate is not None and l.fault_rate < 0:
            raise ValidationError(f"line {l.id}: negative fault rate", field="fault_rate")
        if l.damage_cost is not None and l.damage_cost < 0:
            raise ValidationError(f"line {l.id}: negative damage cost", field="damage_cost")
    for d in case.loads:
        if d.bus not in bus_ids:
            raise ValidationError(f"load {d.id}: bus {d.bus} not found", field="bus")
        if d.priority <= 0:
            raise ValidationError(f"load {d.id}: priority must be positive", field="priority")
        if d.base_demand < 0:
            raise ValidationError(f"load {d.id}: negative demand", field="base_demand")
    if case.horizon < 1:
        raise ValidationError("horizon must be >= 1", field="horizon")
    if any(t < 1 or t > case.horizon for t in case.peak_periods):
        raise ValidationError("peak period outside 1..T", field="peak_periods")
    if case.peak_factor < 0:
        raise ValidationError("negative peak factor", field="peak_factor")
    lo, hi = case.angle_bounds
    if not lo < 0 < hi:
        raise ValidationError("angle bounds must satisfy lo < 0 < hi", field="angle_bounds")
    if case.base_mva <= 0:
        raise ValidationError("base_mva must be positive", field="base_mva")
    if case.bus_damage_cost is not None and case.bus_damage_cost < 0:
        raise ValidationError("negative bus damage cost", field="bus_damage_cost")
    env = case.environment
    if env.fault_rate < 0:
        raise ValidationError("negative fault rate", field="fault_rate")
    if env.cell_size <= 0:
        raise ValidationError("cell size must be positive", field="cell_size")
    if not 0 <= env.q0 <= 1:
        raise ValidationError("q0 must lie in [0, 1]", field="q0")
    if env.ignition_scale < 0:
        raise ValidationError("negative ignition scale", field="ignition_scale")


# -- operations -------------------------------------------------------------

def demand(case: PowerCase, d, t: int) -> float:
    """Demand of load ``d`` (index or id) in period ``t`` (1-based), in MW."""
    if not 1 <= t <= case.horizon:
        raise OutOfRange(f"period {t} outside 1..{case.horizon}")
    if isinstance(d, str):
        matches = [ld for ld in case.loads if ld.id == d]
        if not matches:
            raise OutOfRange(f"load {d!r} not found")
        load = matches[0]
    else:
        load = case.loads[d]
    factor = case.peak_factor if t in case.peak_periods else 1.0
    return load.base_demand * factor


def default_cost_ratings(case: PowerCase) -> PowerCase:
    """Fill missing damage costs and clamp load priorities into [50, 1000]."""
    gens = tuple(g if g.damage_cost is not None
                 else dataclasses.replace(g, damage_cost=FUEL_DAMAGE_COST[g.fuel])
                 for g in case.generators)
    lines = tuple(l if l.damage_cost is not None
                  else dataclasses.replace(l, damage_cost=LINE_COST_PER_KM * l.length_km)
                  for l in case.lines)
    lo, hi = PRIORITY_RANGE
    loads = tuple(dataclasses.replace(d, priority=min(max(d.priority, lo), hi))
                  for d in case.loads)
    bus_cost = BUS_DAMAGE_COST if case.bus_damage_cost is None else case.bus_damage_cost
    return dataclasses.replace(case, generators=gens, lines=lines, loads=loads,
                               bus_damage_cost=bus_cost)


# -- serialization ----------------------------------------------------------

def _opt(d: dict, key, value):
    if value is not None:
        d[key] = value


def case_to_dict(case: PowerCase) -> dict:
    env = case.environment
    gens = []
    for g in case.generators:
        item = {"id": g.id, "bus": g.bus, "p_min": g.p_min, "p_max": g.p_max, "fuel": g.fuel}
        _opt(item, "damage_cost", g.damage_cost)
        gens.append(item)
    lines = []
    for l in case.lines:
        item = {"id": l.id, "from": l.from_bus, "to": l.to_bus, "susceptance": l.susceptance,
                "thermal_limit": l.thermal_limit, "length_km": l.length_km, "wfpi": l.wfpi}
        _opt(item, "damage_cost", l.damage_cost)
        _opt(item, "fault_rate", l.fault_rate)
        lines.append(item)
    costs = {}
    _opt(costs, "bus_damage_cost", case.bus_damage_cost)
    environment = {"fault_rate": env.fault_rate, "ignition_scale": env.ignition_scale,
                   "cell_size": env.cell_size, "q0": env.q0, "veg": env.veg, "den": env.den,
                   "slope": env.slope, "wind_c1": env.wind_c1, "wind_c2": env.wind_c2}
    if env.wind:
        environment["wind"] = [{"period": w.period, "speed": w.speed, "toward_deg": w.toward_deg}
                               for w in env.wind]
    _opt(environment, "raster", env.raster)
    return {
        "format": FORMAT_TAG,
        "version": 1,
        "name": case.name,
        "network": {
            "base_mva": case.base_mva,
            "angle_bounds": list(case.angle_bounds),
            "buses": [{"id": b.id, "lat": b.lat, "lon": b.lon} for b in case.buses],
            "generators": gens,
            "lines": lines,
            "loads": [{"id": d.id, "bus": d.bus, "base_demand": d.base_demand,
                       "priority": d.priority} for d in case.loads],
        },
        "costs": costs,
        "environment": environment,
        "demand": {"horizon": case.horizon, "peak_periods": sorted(case.peak_periods),
                   "peak_factor": case.peak_factor},
    }


def _num(obj, key, where, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise ParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: field {key!r} must be a number")
    return float(value)


def _optnum(obj, key, where):
    if obj.get(key) is None:
        return None
    return _num(obj, key, where)


def case_from_dict(doc: dict, source_dir: str | None = None) -> PowerCase:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise ParseError(f"not a {FORMAT_TAG} document")
    try:
        net = doc["network"]
        buses = [Bus(str(b["id"]), _num(b, "lat", f"bus {b['id']}"), _num(b, "lon", f"bus {b['id']}"))
                 for b in net["buses"]]
        gens = [Generator(str(g["id"]), str(g["bus"]), _num(g, "p_min", f"generator {g['id']}"),
                          _num(g, "p_max", f"generator {g['id']}"), str(g.get("fuel", "thermal")),
                          _optnum(g, "damage_cost", f"generator {g['id']}"))
                for g in net.get("generators", [])]
        lines = [Line(str(l["id"]), str(l["from"]), str(l["to"]),
                      _num(l, "susceptance", f"line {l['id']}"),
                      _num(l, "thermal_limit", f"line {l['id']}"),
                      _num(l, "length_km", f"line {l['id']}"),
                      _num(l, "wfpi", f"line {l['id']}"),
                      _optnum(l, "damage_cost", f"line {l['id']}"),
                      _optnum(l, "fault_rate", f"line {l['id']}"))
                 for l in net.get("lines", [])]
        loads = [Load(str(d["id"]), str(d["bus"]), _num(d, "base_demand", f"load {d['id']}"),
                      _num(d, "priority", f"load {d['id']}"))
                 for d in net.get("loads", [])]
        env_doc = doc.get("environment", {})
        wind = tuple(WindRecord(int(w["period"]), float(w["speed"]), float(w["toward_deg"]))
                     for w in env_doc.get("wind", []))
        defaults = EnvironmentConfig()
        env = EnvironmentConfig(
            fault_rate=float(env_doc.get("fault_rate", defaults.fault_rate)),
            ignition_scale=float(env_doc.get("ignition_scale", defaults.ignition_scale)),
            cell_size=float(env_doc.get("cell_size", defaults.cell_size)),
            q0=float(env_doc.get("q0", defaults.q0)),
            veg=float(env_doc.get("veg", defaults.veg)),
            den=float(env_doc.get("den", defaults.den)),
            slope=float(env_doc.get("slope", defaults.slope)),
            wind=wind,
            wind_c1=float(env_doc.get("wind_c1", defaults.wind_c1)),
            wind_c2=float(env_doc.get("wind_c2", defaults.wind_c2)),
            raster=env_doc.get("raster"),
        )
        dem = doc.get("demand", {})
        costs = doc.get("costs", {})
        bus_cost = costs.get("bus_damage_cost")
        return PowerCase(
            name=str(doc.get("name", "case")),
            buses=buses, generators=gens, lines=lines, loads=loads,
            horizon=int(dem.get("horizon", 24)),
            peak_periods=frozenset(int(t) for t in dem.get("peak_periods", DEFAULT_PEAK_PERIODS)),
            peak_factor=float(dem.get("peak_factor", 1.2)),
            angle_bounds=tuple(float(a) for a in net.get("angle_bounds", (-math.pi / 2, math.pi / 2))),
            base_mva=float(net.get("base_mva", 100.0)),
            bus_damage_cost=None if bus_cost is None else float(bus_cost),
            environment=env,
            source_dir=source_dir,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"malformed case document: {exc!r}") from exc


def load_case(path) -> PowerCase:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return case_from_dict(doc, source_dir=str(path.parent.resolve()))


def save_case(case: PowerCase, path) -> None:
    Path(path).write_text(json.dumps(case_to_dict(case), indent=2) + "\n")


def case_hash(case: PowerCase) -> str:
    blob = json.dumps(case_to_dict(case), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
