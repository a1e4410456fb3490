import itertools
import math

import numpy as np
import pytest

from emdquery import TransportInstance, WeightedPointSet


def meb_radius_2d(pts):
    """Exact minimum enclosing circle radius by brute force over pairs and triples."""
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    if n == 1:
        return 0.0
    best = math.inf

    def covers(c, r):
        return np.all(np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) <= r * (1 + 1e-12) + 1e-12)

    for i, j in itertools.combinations(range(n), 2):
        c = (pts[i] + pts[j]) / 2
        r = math.dist(pts[i], pts[j]) / 2
        if r < best and covers(c, r):
            best = r
    for i, j, k in itertools.combinations(range(n), 3):
        (ax, ay), (bx, by), (cx, cy) = pts[i], pts[j], pts[k]
        d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(d) < 1e-14:
            continue
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
        r = math.dist((ux, uy), (ax, ay))
        if r < best and covers((ux, uy), r):
            best = r
    return best


def random_integral_instance(rng, max_points=5, max_mass=12, max_dim=4):
    """Random instance with integer weights and equal total mass <= max_mass."""
    d = int(rng.integers(1, max_dim + 1))
    n_a = int(rng.integers(1, max_points + 1))
    n_b = int(rng.integers(1, max_points + 1))
    mass = int(rng.integers(1, max_mass + 1))

    def split(total, k):
        # stars and bars: nonnegative integer parts summing to total
        cuts = np.sort(rng.choice(np.arange(1, total + k), size=k - 1, replace=False)) if k > 1 else np.array([], dtype=int)
        parts = np.diff(np.concatenate(([0], cuts, [total + k]))) - 1
        return parts.astype(float)

    wa = split(mass, n_a)
    wb = split(mass, n_b)
    xa = rng.integers(-5, 6, size=(n_a, d)).astype(float) + rng.uniform(-0.5, 0.5, size=(n_a, d))
    xb = rng.integers(-5, 6, size=(n_b, d)).astype(float) + rng.uniform(-0.5, 0.5, size=(n_b, d))
    return TransportInstance(WeightedPointSet(xa, wa), WeightedPointSet(xb, wb))


def random_colocated_instance(rng, max_points=5, max_mass=12, max_dim=3):
    d = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, max_points + 1))
    x = rng.normal(size=(k, d)) * 3
    mass = int(rng.integers(1, max_mass + 1))
    wa = np.bincount(rng.integers(0, k, size=mass), minlength=k).astype(float)
    wb = np.bincount(rng.integers(0, k, size=mass), minlength=k).astype(float)
    return TransportInstance(WeightedPointSet(x, wa), WeightedPointSet(x, wb))


def random_pair(rng, n, d, spread=1.0, shift=None):
    a = rng.normal(size=(n, d))
    b = rng.normal(size=(n, d)) * spread
    if shift is not None:
        b = b + shift
    return WeightedPointSet.uniform(a), WeightedPointSet.uniform(b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
