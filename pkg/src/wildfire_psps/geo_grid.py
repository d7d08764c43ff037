"""Planar UTM grid over the network and the cell <-> component maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import utm

from .case_model import PowerCase
from .errors import OutOfDomain, OutOfRange, ValidationError

DEFAULT_CELL_SIZE = 1000.0


def zone_for_longitude(lon: float) -> int:
    return min(int(math.floor((lon + 180.0) / 6.0)) + 1, 60)


def latlon_to_utm(lat: float, lon: float, zone: int | None = None, northern: bool | None = None):
    """WGS84 transverse Mercator; returns ``(easting, northing, zone)``.

    ``zone`` forces a zone so that a whole case shares one planar frame.
    """
    if not -84.0 <= lat <= 84.0:
        raise OutOfDomain(f"latitude {lat} outside the UTM domain")
    if zone is None:
        zone = zone_for_longitude(lon)
    if northern is None:
        northern = lat >= 0
    e, n, _, _ = utm.from_latlon(lat, lon, force_zone_number=zone, force_northern=northern)
    return float(e), float(n), zone


def utm_to_latlon(easting: float, northing: float, zone: int, northern: bool = True):
    lat, lon = utm.to_latlon(easting, northing, zone, northern=northern, strict=False)
    return float(lat), float(lon)


@dataclass(frozen=True)
class GridGeometry:
    origin: tuple[float, float]
    cell_size: float
    n_cols: int
    n_rows: int
    zone: int = 0
    northern: bool = True

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValidationError("cell_size must be positive", field="cell_size")

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows

    def contains(self, k) -> bool:
        col, row = k
        return 0 <= col < self.n_cols and 0 <= row < self.n_rows

    def flat(self, k) -> int:
        col, row = k
        return row * self.n_cols + col

    def unflat(self, idx: int) -> tuple[int, int]:
        return idx % self.n_cols, idx // self.n_cols

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """Half-open cells ``[x0, x0+s)``; the outer east/north edge is closed."""
        col = int(math.floor((x - self.origin[0]) / self.cell_size))
        row = int(math.floor((y - self.origin[1]) / self.cell_size))
        if col == self.n_cols and math.isclose(x, self.origin[0] + self.n_cols * self.cell_size):
            col -= 1
        if row == self.n_rows and math.isclose(y, self.origin[1] + self.n_rows * self.cell_size):
            row -= 1
        if not self.contains((col, row)):
            raise OutOfRange(f"point ({x}, {y}) outside grid")
        return col, row

    def to_dict(self) -> dict:
        return {"origin": list(self.origin), "cell_size": self.cell_size,
                "n_cols": self.n_cols, "n_rows": self.n_rows, "zone": self.zone,
                "northern": self.northern}


@dataclass(frozen=True)
class CellMaps:
    """Flat cell indices (``row * n_cols + col``) for every component."""

    bus_cell: tuple[int, ...]
    line_cells: tuple[tuple[int, ...], ...]
    cell_lines: dict
    cells_with_bus: frozenset
    cells_with_line: frozenset
    bus_xy: tuple[tuple[float, float], ...] = ()


def neighbors8(geom: GridGeometry, k) -> set:
    """Moore neighbourhood of cell ``k = (col, row)`` clipped to the grid."""
    if not geom.contains(k):
        raise OutOfRange(f"cell {k} outside grid")
    col, row = k
    out = set()
    for dc in (-1, 0, 1):
        for dr in (-1, 0, 1):
            if dc == 0 and dr == 0:
                continue
            nb = (col + dc, row + dr)
            if geom.contains(nb):
                out.add(nb)
    return out


def segment_cells(geom: GridGeometry, p0, p1) -> list[tuple[int, int]]:
    """Every half-open cell that holds at least one point of segment p0-p1.

    The segment is split at each grid-line crossing; the crossing points and a
    midpoint of each piece are mapped to cells, which covers corner passes.
    """
    (x0, y0), (x1, y1) = p0, p1
    s = geom.cell_size
    ox, oy = geom.origin
    params = [0.0, 1.0]
    for a0, a1, o in ((x0, x1, ox), (y0, y1, oy)):
        if a1 == a0:
            continue
        lo, hi = sorted((a0, a1))
        k_lo = math.ceil((lo - o) / s)
        k_hi = math.floor((hi - o) / s)
        for k in range(k_lo, k_hi + 1):
            params.append((o + k * s - a0) / (a1 - a0))
    params = sorted(set(p for p in params if 0.0 <= p <= 1.0))
    pts = []
    for i, p in enumerate(params):
        pts.append(p)
        if i + 1 < len(params):
            pts.append(0.5 * (p + params[i + 1]))
    cells = []
    seen = set()
    for p in pts:
        x = x0 + p * (x1 - x0)
        y = y0 + p * (y1 - y0)
        # snap coordinates that sit on a grid line to the line itself
        gx = (x - ox) / s
        gy = (y - oy) / s
        if abs(gx - round(gx)) < 1e-9:
            x = ox + round(gx) * s
        if abs(gy - round(gy)) < 1e-9:
            y = oy + round(gy) * s
        k = geom.cell_of(x, y)
        if k not in seen:
            seen.add(k)
            cells.append(k)
    return cells


def project_case(case: PowerCase):
    """Bus UTM coordinates in the zone of the case centroid."""
    lats = np.array([b.lat for b in case.buses])
    lons = np.array([b.lon for b in case.buses])
    if not (np.all(np.isfinite(lats)) and np.all(np.isfinite(lons))):
        raise ValidationError("bus coordinates missing", field="lat")
    zone = zone_for_longitude(float(lons.mean()))
    northern = bool(lats.mean() >= 0)
    xy = [latlon_to_utm(la, lo, zone=zone, northern=northern)[:2] for la, lo in zip(lats, lons)]
    return xy, zone, northern


def build_grid(case: PowerCase, cell_size: float | None = None):
    """Grid covering the bounding rectangle of the network plus all cell maps."""
    if cell_size is None:
        cell_size = case.environment.cell_size or DEFAULT_CELL_SIZE
    if cell_size <= 0:
        raise ValidationError("cell_size must be positive", field="cell_size")
    xy, zone, northern = project_case(case)
    xs = [p[0] for p in xy]
    ys = [p[1] for p in xy]
    x_min, y_min = min(xs), min(ys)
    width, height = max(xs) - x_min, max(ys) - y_min
    n_cols = max(1, math.ceil(width / cell_size - 1e-9))
    n_rows = max(1, math.ceil(height / cell_size - 1e-9))
    geom = GridGeometry((x_min, y_min), float(cell_size), n_cols, n_rows, zone, northern)

    bus_cell = tuple(geom.flat(geom.cell_of(x, y)) for x, y in xy)
    pos = {b.id: i for i, b in enumerate(case.buses)}
    line_cells = []
    cell_lines: dict[int, list[int]] = {}
    for li, line in enumerate(case.lines):
        a, b = xy[pos[line.from_bus]], xy[pos[line.to_bus]]
        cells = tuple(sorted(geom.flat(k) for k in segment_cells(geom, a, b)))
        line_cells.append(cells)
        for k in cells:
            cell_lines.setdefault(k, []).append(li)
    maps = CellMaps(
        bus_cell=bus_cell,
        line_cells=tuple(line_cells),
        cell_lines={k: tuple(v) for k, v in sorted(cell_lines.items())},
        cells_with_bus=frozenset(bus_cell),
        cells_with_line=frozenset(cell_lines),
        bus_xy=tuple((float(x), float(y)) for x, y in xy),
    )
    return geom, maps


def component_cells(case: PowerCase, maps: CellMaps) -> list[tuple[int, ...]]:
    """Cells occupied by each component in canonical order; generators sit in their bus cell."""
    out = [(k,) for k in maps.bus_cell]
    out += [(maps.bus_cell[b],) for b in case.gen_bus()]
    out += list(maps.line_cells)
    return out
