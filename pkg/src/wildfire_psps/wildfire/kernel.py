"""Selects the compiled CA kernel when it is importable.

Set ``WILDFIRE_PSPS_PURE=1`` to force the numpy implementation.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernel_py

BACKEND = "python"
_compiled = None

if os.environ.get("WILDFIRE_PSPS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel as _compiled  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _compiled = None


def propagate(fire_period, fuel, base_q, wind, ign_p, key, t_start, t_end, backend=None):
    """Dispatch to the selected kernel; ``backend`` overrides the import-time choice."""
    use = backend or BACKEND
    fire_period = np.ascontiguousarray(fire_period, dtype=np.int32)
    base_q = np.ascontiguousarray(base_q, dtype=np.float64)
    wind = np.ascontiguousarray(wind, dtype=np.float64)
    if ign_p is not None:
        ign_p = np.ascontiguousarray(ign_p, dtype=np.float64)
    if use == "cython":
        if _compiled is None:
            raise ImportError("compiled kernel not built")
        _compiled.propagate(fire_period, np.ascontiguousarray(fuel, dtype=np.uint8), base_q, wind,
                            ign_p, np.uint64(key), int(t_start), int(t_end))
    else:
        _kernel_py.propagate(fire_period, np.asarray(fuel, dtype=bool), base_q, wind, ign_p,
                             int(key), int(t_start), int(t_end))
    return fire_period


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])
