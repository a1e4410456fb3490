import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emdquery import WeightedPointSet, approx_radius, distance

from conftest import meb_radius_2d


def test_distance_345():
    assert distance((0, 0), (3, 4)) == 5.0


def test_distance_identity():
    p = np.array([1.5, -2.0, 7.25])
    assert distance(p, p) == 0.0


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance((0, 0), (1, 2, 3))


def test_distance_matches_compensated_sum(rng):
    for _ in range(20):
        p, q = rng.normal(size=100), rng.normal(size=100)
        ref = math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(p.tolist(), q.tolist())))
        assert abs(distance(p, q) - ref) <= 1e-12 * ref


coords = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3, allow_nan=False))


@given(coords, coords, coords)
def test_triangle_inequality(p, q, r):
    assert distance(p, r) <= distance(p, q) + distance(q, r) + 1e-9


@given(coords, coords)
def test_distance_symmetric(p, q):
    assert distance(p, q) == distance(q, p)


def test_weighted_point_set_validation():
    with pytest.raises(ValueError):
        WeightedPointSet(np.zeros((2, 2)), [1.0, -1.0])
    with pytest.raises(ValueError):
        WeightedPointSet(np.array([[0.0, np.nan]]), [1.0])
    with pytest.raises(ValueError):
        WeightedPointSet(np.zeros((2, 2)), [1.0])
    with pytest.raises(ValueError):
        WeightedPointSet(np.zeros((0, 2)), [])
    s = WeightedPointSet(np.zeros((3, 2)), [1.0, 2.0, 0.0])
    assert s.total_weight == 3.0
    assert s.check_cache()
    with pytest.raises(ValueError):
        s.points[0, 0] = 1.0


def test_approx_radius_two_points():
    r, anchor = approx_radius(WeightedPointSet.uniform([[0, 0], [6, 8]]))
    assert r == 10.0
    assert np.array_equal(anchor, [0, 0])
    assert 5.0 <= r <= 10.0


def test_approx_radius_singleton():
    assert approx_radius(WeightedPointSet.uniform([[3.0, 1.0]]))[0] == 0.0


def test_approx_radius_within_factor_two_of_exact_meb(rng):
    for _ in range(10):
        theta = rng.uniform(0, 2 * np.pi, 50)
        rad = 4.0 * np.sqrt(rng.uniform(0, 1, 50))
        pts = np.column_stack((rad * np.cos(theta), rad * np.sin(theta)))
        rng.shuffle(pts)
        exact = meb_radius_2d(pts)
        r, anchor = approx_radius(WeightedPointSet.uniform(pts))
        assert exact - 1e-9 <= r <= 2 * exact + 1e-9
        assert all(distance(anchor, p) <= r for p in pts)


@settings(max_examples=50)
@given(
    arrays(np.float64, (8, 3), elements=st.floats(-100, 100, allow_nan=False)),
    arrays(np.float64, 3, elements=st.floats(-100, 100, allow_nan=False)),
    st.floats(0.01, 100),
)
def test_approx_radius_translation_and_scale(pts, shift, s):
    base = WeightedPointSet.uniform(pts)
    r = approx_radius(base)[0]
    assert approx_radius(base.transformed(shift=shift))[0] == pytest.approx(r, rel=1e-9, abs=1e-9)
    assert approx_radius(base.transformed(scale=s))[0] == pytest.approx(s * r, rel=1e-9, abs=1e-9)
