"""Built-in cases and scenario sets used by tests, examples and the CLI.

``toy3``     3 buses in a chain, 2 generators, 2 loads, T = 4.
``random``   small random networks with random handcrafted scenarios.
``socal73``  synthetic 73-bus, 24-period network over a 180 km x 138 km
             area of Southern California (stored under ``data/``).
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .case_model import (Bus, EnvironmentConfig, Generator, Line, Load, PowerCase,
                         case_from_dict, case_to_dict, default_cost_ratings)
from .wildfire.scenario import DisruptionScenario


def toy3_case(horizon: int = 4) -> PowerCase:
    """b1 -- b2 -- b3; thermal unit at b1, wind unit at b3, loads at b2 and b3.

    Full service is feasible in every period. Coordinates put the network on
    a small grid (about 8 km x 4 km) so it can also be simulated.
    """
    buses = (Bus("b1", 34.000, -118.000), Bus("b2", 34.005, -117.955),
             Bus("b3", 34.030, -117.920))
    gens = (Generator("g1", "b1", 0.0, 150.0, "thermal"),
            Generator("g3", "b3", 0.0, 40.0, "wind"))
    lines = (Line("l12", "b1", "b2", 10.0, 100.0, 40.0, 8.0),
             Line("l23", "b2", "b3", 8.0, 60.0, 60.0, 12.0))
    loads = (Load("d2", "b2", 60.0, 500.0), Load("d3", "b3", 50.0, 200.0))
    env = EnvironmentConfig(fault_rate=0.03, ignition_scale=0.06, cell_size=500.0, q0=0.35)
    case = PowerCase("toy3", buses, gens, lines, loads, horizon=horizon,
                     peak_periods=frozenset({min(3, horizon)}), peak_factor=1.2,
                     environment=env)
    return default_cost_ratings(case)


def toy3_scenarios(case: PowerCase | None = None) -> list[DisruptionScenario]:
    """Six handcrafted scenarios covering every recourse feature.

    Component positions: b1=0 b2=1 b3=2 g1=3 g3=4 l12=5 l23=6.
    """
    return [
        DisruptionScenario(None, probability=0.10),
        DisruptionScenario(2, u={5}, fire_sets={5: {5, 0, 3}}, probability=0.20),
        DisruptionScenario(3, v={6}, probability=0.20),
        DisruptionScenario(1, u={6}, fire_sets={6: {6, 2, 4}}, probability=0.15),
        DisruptionScenario(2, v={4}, u={5}, fire_sets={5: {5, 1}}, probability=0.15),
        DisruptionScenario(4, u={5, 6}, fire_sets={5: {5, 0}, 6: {6, 4}}, probability=0.20),
    ]


def random_toy(seed: int, n_bus: int = 3, horizon: int = 3, n_scenarios: int = 5):
    """A random connected network plus random scenarios; ``(case, scenarios)``."""
    rng = np.random.default_rng(seed)
    buses = tuple(Bus(f"b{i}", 34.0 + 0.01 * i, -118.0 + 0.02 * rng.random()) for i in range(n_bus))
    lines = []
    for i in range(1, n_bus):
        j = int(rng.integers(0, i))
        lines.append(Line(f"l{j}{i}", f"b{j}", f"b{i}", float(rng.uniform(5, 15)),
                          float(rng.uniform(40, 120)), float(rng.uniform(10, 80)),
                          float(rng.uniform(1, 10))))
    gen_buses = rng.choice(n_bus, size=2, replace=False)
    gens = (Generator("g0", f"b{gen_buses[0]}", 0.0, float(rng.uniform(80, 160)), "thermal"),
            Generator("g1", f"b{gen_buses[1]}", 0.0, float(rng.uniform(20, 60)), "wind"))
    load_buses = rng.choice(n_bus, size=2, replace=False)
    loads = tuple(Load(f"d{k}", f"b{b}", float(rng.uniform(20, 70)), float(rng.uniform(50, 1000)))
                  for k, b in enumerate(load_buses))
    case = default_cost_ratings(PowerCase(f"random{seed}", buses, gens, tuple(lines), loads,
                                          horizon=horizon, peak_periods=frozenset({horizon}),
                                          peak_factor=1.2))
    C = case.n_components
    line_pos = list(range(case.n_bus + case.n_gen, C))
    probs = rng.dirichlet(np.ones(n_scenarios))
    scenarios = []
    for k in range(n_scenarios):
        if k == 0:
            scenarios.append(DisruptionScenario(None, probability=float(probs[k])))
            continue
        tau = int(rng.integers(1, horizon + 1))
        v = {int(c) for c in rng.choice(C, size=int(rng.integers(0, 2)), replace=False)}
        u = {int(c) for c in rng.choice(line_pos, size=int(rng.integers(1, 3)), replace=False)}
        fire = {c: {c} | {int(x) for x in rng.choice(C, size=int(rng.integers(0, 3)), replace=False)}
                for c in u}
        scenarios.append(DisruptionScenario(tau, v=v, u=u, fire_sets=fire,
                                            probability=float(probs[k])))
    total = sum(s.probability for s in scenarios)
    scenarios = [s.with_probability(s.probability / total) for s in scenarios]
    return case, scenarios


# -- synthetic 73-bus case ----------------------------------------------------

SOCAL_ORIGIN = (400_000.0, 3_720_000.0)  # zone 11 easting/northing of the south-west corner
SOCAL_EXTENT = (179_600.0, 137_600.0)


def synth_socal_case(seed: int = 2023) -> PowerCase:
    """Generate the synthetic 73-bus network (deterministic in ``seed``).

    Buses are scattered over the area, lines are the minimum spanning tree of
    the Delaunay graph plus the shortest remaining Delaunay edges (120 lines
    in total). Load priorities grow linearly with the load's share of total
    demand, mapped onto [50, 1000].
    """
    from scipy.sparse.csgraph import minimum_spanning_tree
    from scipy.spatial import Delaunay

    from .geo_grid import utm_to_latlon

    rng = np.random.default_rng(seed)
    n_bus, n_line = 73, 120
    x0, y0 = SOCAL_ORIGIN
    w, h = SOCAL_EXTENT
    pts = rng.random((n_bus, 2)) * [w, h]
    pts[0] = [0.0, 0.4 * h]
    pts[1] = [w, 0.6 * h]
    pts[2] = [0.5 * w, 0.0]
    pts[3] = [0.45 * w, h]
    tri = Delaunay(pts)
    edges = set()
    for simplex in tri.simplices:
        for a in range(3):
            i, j = sorted((int(simplex[a]), int(simplex[(a + 1) % 3])))
            edges.add((i, j))
    edges = sorted(edges)
    length = {e: float(np.hypot(*(pts[e[0]] - pts[e[1]]))) for e in edges}
    dense = np.zeros((n_bus, n_bus))
    for (i, j), d in length.items():
        dense[i, j] = d
    mst = minimum_spanning_tree(dense).tocoo()
    chosen = {tuple(sorted((int(i), int(j)))) for i, j in zip(mst.row, mst.col)}
    for e in sorted(edges, key=length.get):
        if len(chosen) >= n_line:
            break
        chosen.add(e)
    buses = []
    for i, (px, py) in enumerate(pts):
        lat, lon = utm_to_latlon(x0 + px, y0 + py, 11, True)
        buses.append(Bus(f"{101 + i}", round(lat, 7), round(lon, 7)))
    lines = []
    for k, (i, j) in enumerate(sorted(chosen)):
        km = length[(i, j)] / 1000.0
        x_pu = max(0.0004 * km, 0.002)
        wfpi = float(rng.gamma(2.0, 4.0)) * (1.0 + (pts[i][0] + pts[j][0]) / (2 * w))
        lines.append(Line(f"L{k + 1}", buses[i].id, buses[j].id, round(1.0 / x_pu, 4),
                          float(rng.choice([600.0, 800.0, 1000.0])), round(km, 3), round(wfpi, 3)))
    load_buses = sorted(rng.choice(n_bus, size=51, replace=False).tolist())
    demand = np.round(rng.uniform(30.0, 180.0, size=51), 1)
    share = demand / demand.sum()
    pri = 50.0 + 950.0 * (share - share.min()) / (share.max() - share.min())
    loads = [Load(f"D{k + 1}", buses[b].id, float(demand[k]), round(float(pri[k]), 2))
             for k, b in enumerate(load_buses)]
    gen_buses = rng.choice(n_bus, size=33, replace=False).tolist()
    fuels = ["nuclear"] + ["wind"] * 8 + ["thermal"] * 24
    gens = []
    for k, (b, fuel) in enumerate(zip(gen_buses, fuels)):
        cap = {"nuclear": 400.0, "wind": float(rng.uniform(50, 150))}.get(
            fuel, float(rng.uniform(150, 450)))
        gens.append(Generator(f"G{k + 1}", buses[b].id, 0.0, round(cap, 1), fuel))
    env = EnvironmentConfig(fault_rate=1e-4, ignition_scale=1.0, cell_size=1000.0, q0=0.58)
    case = PowerCase("socal73", tuple(buses), tuple(gens), tuple(lines), tuple(loads),
                     horizon=24, peak_factor=1.2, environment=env)
    return default_cost_ratings(case)


def calibrated_socal_case(seed: int = 2023, disruption_rate: float = 0.95) -> PowerCase:
    """Synthetic case with its ignition scale set for the target disruption rate."""
    import dataclasses

    from .geo_grid import build_grid
    from .wildfire.env import build_env, calibrate_ignition_scale

    case = synth_socal_case(seed)
    geom, maps = build_grid(case)
    env = build_env(case, geom)
    scale = calibrate_ignition_scale(case, geom, maps, env, disruption_rate)
    return case.with_changes(environment=dataclasses.replace(case.environment,
                                                             ignition_scale=scale))


# -- packaged data ------------------------------------------------------------

def data_path(name: str):
    return resources.files("wildfire_psps") / "data" / name


def load_fixture(name: str) -> PowerCase:
    """``toy3`` is built in code; other names load ``data/<name>.json``."""
    if name == "toy3":
        return toy3_case()
    doc = json.loads(data_path(f"{name}.json").read_text())
    return case_from_dict(doc, source_dir=str(data_path("")))


def write_fixture(case: PowerCase, path) -> None:
    with open(path, "w") as fh:
        json.dump(case_to_dict(case), fh, indent=1)
        fh.write("\n")


def full_service_feasible(case: PowerCase) -> bool:
    """True if every period can serve all demand with everything energized."""
    from .milp.dispatch import PeriodDispatch

    disp = PeriodDispatch(case)
    ones = np.ones(case.n_components)
    return all(disp.solve(ones, t)[0] <= 1e-6 for t in sorted({*case.peak_periods, 1}))


__all__ = ["toy3_case", "toy3_scenarios", "random_toy", "synth_socal_case",
           "calibrated_socal_case", "load_fixture", "write_fixture", "full_service_feasible"]
