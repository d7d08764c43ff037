"""SVG figures: network snapshots, SAA confidence bars and per-scenario cost scatter."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .case_model import PowerCase  # noqa: E402
from .milp.blocks import ShutoffPlan  # noqa: E402


def network_snapshot(case: PowerCase, plan: ShutoffPlan, t: int, path, risk=None) -> list[str]:
    """Draw the grid at period ``t``; returns the ids of lines drawn dashed (off).

    Buses are colored by the share of their load served at ``t``; when a
    risk vector over components is given, energized lines are shaded by it.
    """
    if not 1 <= t <= case.horizon:
        raise ValueError(f"period {t} outside 1..{case.horizon}")
    lat = np.array([b.lat for b in case.buses])
    lon = np.array([b.lon for b in case.buses])
    ends = case.line_ends()
    line0 = case.n_bus + case.n_gen
    fig, ax = plt.subplots(figsize=(7, 5.5))
    off = []
    rmax = None
    if risk is not None:
        rmax = max(float(np.max(risk[line0:])), 1e-12)
    for k, line in enumerate(case.lines):
        i, j = ends[k]
        on = bool(plan.z[line0 + k, t])
        color = "0.3"
        if on and rmax is not None:
            color = plt.cm.Reds(0.25 + 0.75 * float(risk[line0 + k]) / rmax)
        ax.plot([lon[i], lon[j]], [lat[i], lat[j]], linestyle="-" if on else "--",
                color=color if on else "tab:blue", linewidth=1.4 if on else 1.0,
                gid=f"line-{line.id}")
        if not on:
            off.append(line.id)
    served = np.ones(case.n_bus)
    demand = np.zeros(case.n_bus)
    D = case.demand_matrix()[:, t - 1]
    for d, b in enumerate(case.load_bus()):
        demand[b] += D[d]
    got = np.zeros(case.n_bus)
    for d, b in enumerate(case.load_bus()):
        got[b] += D[d] * plan.x[d, t - 1]
    mask = demand > 0
    served[mask] = got[mask] / demand[mask]
    sc = ax.scatter(lon, lat, c=served, cmap="RdYlGn", vmin=0, vmax=1, s=18, zorder=3,
                    edgecolors="k", linewidths=0.3)
    fig.colorbar(sc, ax=ax, label="share of load served")
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(f"{case.name}: period {t}, {len(off)} lines off")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return off


def saa_bars(table, path) -> int:
    """Lower and upper bound means with 95% bars per sample size; returns the bar count."""
    if not table:
        raise ValueError("empty SAA table")
    sizes = np.array([r["size"] for r in table], dtype=float)
    pos = np.arange(len(sizes))
    fig, ax = plt.subplots(figsize=(6, 4))
    n = 0
    for shift, key, label in ((-0.1, "lb", "lower bound"), (0.1, "ub", "upper bound")):
        mean = np.array([r[f"{key}_mean"] for r in table], dtype=float)
        half = np.array([r[f"{key}_ci"] for r in table], dtype=float)
        half = np.where(np.isfinite(half), half, 0.0)
        ax.errorbar(pos + shift, mean, yerr=half, fmt="o", capsize=4, label=label)
        n += len(mean)
    ax.set_xticks(pos, [str(int(s)) for s in sizes])
    ax.set_xlabel("sample size")
    ax.set_ylabel("cost")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return n


def cost_scatter(reports, path) -> int:
    """Per-scenario cost of each plan against the first plan; returns the point count."""
    reports = list(reports)
    if len(reports) < 1:
        raise ValueError("no reports to plot")
    ref = reports[0]
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    n = 0
    for rep in reports[1:] or reports:
        ax.scatter(ref.cost, rep.cost, s=8, alpha=0.6, label=rep.tag)
        n += len(rep.cost)
    top = max(float(max(r.cost.max() for r in reports)), 1.0)
    ax.plot([0, top], [0, top], color="0.5", linewidth=0.8)
    ax.set_xlabel(f"cost under {ref.tag}")
    ax.set_ylabel("cost under other plan")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return n
