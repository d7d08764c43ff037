"""Pure numpy cellular-automaton kernel; reference for the compiled one."""

from __future__ import annotations

import numpy as np

from .rng import IGNITION_SLOT, uniform_array

# (d_row, d_col) of the spread direction source -> target, indexed by slot
OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _shift(mask: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """out[r, c] = mask[r - dr, c - dc], False outside the grid."""
    rows, cols = mask.shape
    out = np.zeros_like(mask)
    r0, r1 = max(dr, 0), rows + min(dr, 0)
    c0, c1 = max(dc, 0), cols + min(dc, 0)
    if r0 < r1 and c0 < c1:
        out[r0:r1, c0:c1] = mask[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
    return out


def propagate(fire_period, fuel, base_q, wind, ign_p, key, t_start, t_end):
    """Advance the automaton in place over periods ``t_start..t_end``.

    ``fire_period[r, c]`` is the period the cell entered the ignited state, or
    -1. A cell ignited in period f is burning from f + 1 on and spreads to its
    fuel neighbours in every period it is burning. ``ign_p`` (or None) is the
    exogenous ignition probability of each fuel cell per period.
    """
    rows, cols = fire_period.shape
    n_cells = rows * cols
    flat_fire = fire_period.reshape(-1)
    for t in range(t_start, t_end + 1):
        burning = (fire_period >= 0) & (fire_period <= t - 1)
        cand = fuel & (fire_period < 0)
        newly = np.zeros(n_cells, dtype=bool)
        if ign_p is not None:
            idx = np.flatnonzero(cand & (ign_p > 0))
            if idx.size:
                u = uniform_array(key, t, idx, IGNITION_SLOT, n_cells)
                newly[idx[u < ign_p.reshape(-1)[idx]]] = True
        if burning.any():
            for slot, (dr, dc) in enumerate(OFFSETS):
                idx = np.flatnonzero(cand & _shift(burning, dr, dc))
                if not idx.size:
                    continue
                q = np.minimum(1.0, base_q.reshape(-1)[idx] * wind[t, slot])
                u = uniform_array(key, t, idx, slot, n_cells)
                newly[idx[u < q]] = True
        flat_fire[newly] = t
    return fire_period
