import math

import numpy as np
import pytest
import shapely
from hypothesis import given, strategies as st

from groupnav.geometry import contains, contains_points, convex_hull, hull_distance, in_region_P, rotate

from oracles import brute_force_hull


def test_single_point():
    h = convex_hull([(0, 0)])
    assert h.kind == "point" and h.vertices == ((0.0, 0.0),)


def test_collinear_reduces_to_segment():
    assert convex_hull([(1, 0), (0, 0), (2, 0)]).vertices == ((0.0, 0.0), (2.0, 0.0))


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        convex_hull([])


def test_square_with_interior_points():
    h = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5), (0.5, 0)])
    assert h.vertices == ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


def test_contains_examples():
    sq = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert contains(sq, (0.5, 0.5))
    assert not contains(sq, (2, 2), 0.1)
    assert contains(convex_hull([(0, 0), (2, 0)]), (1, 0.05), 0.1)
    assert contains(convex_hull([(1, 1)]), (1.05, 1.0), 0.1)


def test_region_P_examples():
    a = convex_hull([(0, 0), (2, 0), (2, 2), (0, 2)])
    b = convex_hull([(1, 1), (3, 1), (3, 3), (1, 3)])
    assert in_region_P((0.5, 0.5), a, [])
    assert not in_region_P((1.5, 1.5), a, [b])
    assert in_region_P((0.5, 1.5), a, [b])


cloud = st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1, max_size=50)


@given(cloud)
def test_hull_matches_brute_force_and_shapely(pts):
    pts = [(x / 10, y / 10) for x, y in pts]
    h = convex_hull(pts)
    assert set(h.vertices) == brute_force_hull(pts)
    ref = shapely.convex_hull(shapely.MultiPoint(pts))
    if h.kind == "polygon":
        assert ref.area == pytest.approx(shapely.Polygon(h.vertices).area)
        # counterclockwise
        assert shapely.Polygon(h.vertices).exterior.is_ccw


@given(cloud)
def test_hull_idempotent_and_contains_inputs(pts):
    h = convex_hull(pts)
    assert convex_hull(h.vertices) == h
    assert contains_points(h, pts, 1e-9).all()


@given(cloud, st.floats(-math.pi, math.pi), st.floats(-10, 10), st.floats(-10, 10))
def test_hull_rigid_equivariance(pts, angle, tx, ty):
    moved = rotate(np.asarray(pts, dtype=float), angle) + (tx, ty)
    a = rotate(np.asarray(convex_hull(pts).array), angle) + (tx, ty)
    b = convex_hull(moved).array
    assert len(a) == len(b)
    # same vertex cycle up to a starting offset
    k = int(np.argmin(np.hypot(*(a - b[0]).T)))
    assert np.allclose(np.roll(a, -k, axis=0), b, atol=1e-7)


@given(cloud, st.tuples(st.floats(-8, 8), st.floats(-8, 8)))
def test_distance_matches_shapely(pts, p):
    h = convex_hull(pts)
    geom = shapely.convex_hull(shapely.MultiPoint(pts))
    assert hull_distance(h, [p])[0] == pytest.approx(geom.distance(shapely.Point(p)), abs=1e-9)
