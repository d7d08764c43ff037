"""Counter-based random draws.

Every uniform is a pure function of ``(stream key, period, cell, slot)``, so a
draw never depends on how many other draws happened before it. The compiled
kernel reimplements :func:`mix64` bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB
SEED_SALT = 0x5851F42D4C957F2D

# stream kinds
EXOGENOUS = 1
ENDOGENOUS = 2
FAULT = 3

# slots 0..7 are spread directions, 8 is exogenous ignition
IGNITION_SLOT = 8
N_SLOTS = 9

_U53 = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    z = (x + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * M1) & MASK
    z = ((z ^ (z >> 27)) * M2) & MASK
    return z ^ (z >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64) + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(M2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, scenario: int, kind: int, origin: int = 0) -> int:
    h = mix64((seed & MASK) ^ SEED_SALT)
    h = mix64(h ^ (scenario & MASK))
    return mix64(h ^ (((kind & 0xFFFFFFFF) << 32) | (origin & 0xFFFFFFFF)))


def counter(t: int, cell, slot: int, n_cells: int):
    return (t * n_cells + cell) * N_SLOTS + slot


def uniform(key: int, t: int, cell: int, slot: int, n_cells: int) -> float:
    c = counter(t, cell, slot, n_cells) & MASK
    return (mix64(key ^ mix64(c)) >> 11) * _U53


def uniform_array(key: int, t: int, cells: np.ndarray, slot: int, n_cells: int) -> np.ndarray:
    c = (np.uint64(t) * np.uint64(n_cells) + cells.astype(np.uint64)) * np.uint64(N_SLOTS) + np.uint64(slot)
    h = mix64_array(np.uint64(key) ^ mix64_array(c))
    return (h >> np.uint64(11)).astype(np.float64) * _U53


@dataclass(frozen=True)
class RngStream:
    """Identifies the random stream of one scenario."""

    seed: int
    stream: int

    def key(self, kind: int, origin: int = 0) -> int:
        return stream_key(self.seed, self.stream, kind, origin)
