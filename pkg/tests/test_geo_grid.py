import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import dense_segment_cells
from pyproj import Transformer

from wildfire_psps.errors import OutOfDomain, OutOfRange, ValidationError
from wildfire_psps.fixtures import SOCAL_EXTENT, load_fixture
from wildfire_psps.geo_grid import (GridGeometry, build_grid, latlon_to_utm, neighbors8,
                                    project_case, segment_cells, utm_to_latlon, zone_for_longitude)


def test_central_meridian_on_equator():
    e, n, zone = latlon_to_utm(0.0, -117.0)
    assert zone == 11
    assert e == pytest.approx(500000.0, abs=1e-6)
    assert n == pytest.approx(0.0, abs=1e-6)


def test_latitude_step_near_34n():
    _, n0, _ = latlon_to_utm(34.0, -118.0)
    _, n1, _ = latlon_to_utm(34.01, -118.0)
    assert abs((n1 - n0) - 1105.0) <= 5.0


@given(lat=st.floats(-80, 84), lon=st.floats(-179.9, 179.9))
def test_projection_matches_pyproj(lat, lon):
    zone = zone_for_longitude(lon)
    north = lat >= 0
    epsg = (32600 if north else 32700) + zone
    ref = Transformer.from_crs("EPSG:4326", f"EPSG:{epsg}", always_xy=True)
    ex, nx = ref.transform(lon, lat)
    e, n, z = latlon_to_utm(lat, lon)
    assert z == zone
    assert e == pytest.approx(ex, abs=1e-3)
    assert n == pytest.approx(nx, abs=1e-3)


@given(lat=st.floats(30, 40), lon=st.floats(-121, -115))
def test_projection_round_trip(lat, lon):
    e, n, z = latlon_to_utm(lat, lon, zone=11)
    la, lo = utm_to_latlon(e, n, z)
    assert abs(la - lat) < 1e-6 and abs(lo - lon) < 1e-6


def test_polar_latitude_rejected():
    with pytest.raises(OutOfDomain):
        latlon_to_utm(85.0, 10.0)


def test_socal_zone_and_grid_size():
    case = load_fixture("socal73")
    _, zone, northern = project_case(case)
    lon = sum(b.lon for b in case.buses) / case.n_bus
    assert zone == math.floor(lon / 6) + 31 == 11 and northern
    geom, maps = build_grid(case, 1000.0)
    assert SOCAL_EXTENT == (179_600.0, 137_600.0)
    assert (geom.n_cols, geom.n_rows) == (180, 138)
    for b in range(case.n_bus):
        assert maps.bus_cell[b] in maps.cells_with_bus


def test_rectangle_180_by_138_km():
    geom = GridGeometry((0.0, 0.0), 1000.0, 180, 138)
    assert geom.n_cells == 180 * 138
    assert geom.cell_of(180_000.0, 138_000.0) == (179, 137)


def test_degenerate_segment_single_cell():
    geom = GridGeometry((0.0, 0.0), 100.0, 10, 10)
    assert segment_cells(geom, (120.0, 130.0), (170.0, 190.0)) == [(1, 1)]


def test_diagonal_across_3x3_block_matches_dense_sampling():
    geom = GridGeometry((0.0, 0.0), 1.0, 3, 3)
    cells = set(segment_cells(geom, (0.1, 0.2), (2.9, 2.7)))
    dense = dense_segment_cells(0.1, 0.2, 2.9, 2.7, 1.0, 3, 3, samples=30000)
    assert cells == {(c, r) for r, c in dense}


def test_exact_corner_pass_includes_touched_cells():
    geom = GridGeometry((0.0, 0.0), 1.0, 3, 3)
    cells = set(segment_cells(geom, (0.5, 0.5), (2.5, 2.5)))
    assert {(0, 0), (1, 1), (2, 2)} <= cells


@given(x0=st.floats(0, 50), y0=st.floats(0, 40), x1=st.floats(0, 50), y1=st.floats(0, 40))
def test_supercover_contains_dense_samples(x0, y0, x1, y1):
    geom = GridGeometry((0.0, 0.0), 7.0, 8, 6)
    cells = set(segment_cells(geom, (x0, y0), (x1, y1)))
    dense = dense_segment_cells(x0, y0, x1, y1, 7.0, 6, 8, samples=4000)
    assert {(c, r) for r, c in dense} <= cells


def test_inverse_map_consistency():
    case = load_fixture("socal73")
    _, maps = build_grid(case)
    assert sum(len(v) for v in maps.cell_lines.values()) == sum(len(c) for c in maps.line_cells)
    for l, cells in enumerate(maps.line_cells):
        for k in cells:
            assert l in maps.cell_lines[k]


@pytest.mark.parametrize("cell,count", [((5, 5), 8), ((0, 0), 3), ((0, 5), 5), ((9, 9), 3)])
def test_neighbors8(cell, count):
    geom = GridGeometry((0.0, 0.0), 1.0, 10, 10)
    nb = neighbors8(geom, cell)
    assert len(nb) == count
    assert all(max(abs(a - b) for a, b in zip(n, cell)) == 1 for n in nb)


def test_neighbors8_outside_grid():
    with pytest.raises(OutOfRange):
        neighbors8(GridGeometry((0.0, 0.0), 1.0, 4, 4), (4, 0))


def test_invalid_cell_size():
    with pytest.raises(ValidationError):
        GridGeometry((0.0, 0.0), 0.0, 1, 1)
    with pytest.raises(ValidationError):
        build_grid(load_fixture("toy3"), -1.0)


def test_half_open_cells_lower_left_owner():
    geom = GridGeometry((0.0, 0.0), 10.0, 3, 3)
    assert geom.cell_of(10.0, 10.0) == (1, 1)
    assert geom.cell_of(9.999, 10.0) == (0, 1)
