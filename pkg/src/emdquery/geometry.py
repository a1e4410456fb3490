"""Weighted point sets and Euclidean distance kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from emdquery.config import DEFAULT_TOLERANCES


@dataclass(frozen=True, eq=False)
class WeightedPointSet:
    """An immutable set of ``n`` points in ``R^d`` with nonnegative weights.

    Zero-weight points are kept: they still take part in covers, they just
    carry no mass.
    """

    points: np.ndarray
    weights: np.ndarray
    total_weight: float = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be an (n, d) matrix with n, d >= 1, got shape {pts.shape}")
        w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(f"{w.shape[0]} weights for {pts.shape[0]} points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinate")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite weight")
        if np.any(w < 0):
            raise ValueError("negative weight")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total_weight", float(w.sum()))

    @classmethod
    def uniform(cls, points) -> "WeightedPointSet":
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(pts, np.ones(pts.shape[0]))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def check_cache(self, rel: float = DEFAULT_TOLERANCES.weight_cache_rel) -> bool:
        return abs(float(self.weights.sum()) - self.total_weight) <= rel * max(self.total_weight, 1.0)

    def transformed(self, scale: float = 1.0, shift=None) -> "WeightedPointSet":
        pts = self.points * scale
        if shift is not None:
            pts = pts + np.asarray(shift, dtype=np.float64)
        return WeightedPointSet(pts, self.weights)


def distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape[0]} vs {q.shape[0]}")
    # same kernel as distances_to so single and batched distances agree bitwise
    return float(distances_to(p[None, :], q)[0])


def distances_to(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Distances from every row of ``points`` to the single point ``q``."""
    diff = points - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def pairwise_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    return cdist(x, y, metric="euclidean")


def approx_radius(s: WeightedPointSet) -> tuple[float, np.ndarray]:
    """Farthest distance from the first stored point.

    The result lies in ``[delta, 2 * delta]`` where ``delta`` is the radius of
    the minimum enclosing ball, and costs a single O(nd) pass.
    """
    anchor = s.points[0]
    return float(distances_to(s.points, anchor).max()), anchor
