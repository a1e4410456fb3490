"""Synthetic point clouds sampled from random polynomial manifolds.

Latent parameters ``t`` are drawn uniformly from ``[-1, 1]^m`` and every
ambient coordinate is a sparse random polynomial in ``t``. The polynomial
degree serves as a rough knob for intrinsic complexity: degree 1 gives an
affine ``m``-flat, higher degrees bend the sheet more.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from emdquery.geometry import WeightedPointSet

MAX_DEGREE = 50
MAX_INTRINSIC = 5


@dataclass(frozen=True)
class ManifoldSpec:
    n_points: int
    ambient_dim: int = 500
    intrinsic_dim: int = 2
    degree: int = 1
    seed: int = 0
    coef_scale: float = 1.0
    monomials_per_coord: int = 0  # 0 means 3 * degree

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if not 1 <= self.intrinsic_dim <= MAX_INTRINSIC:
            raise ValueError(f"intrinsic_dim must lie in [1, {MAX_INTRINSIC}]")
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must lie in [1, {MAX_DEGREE}]")
        if self.ambient_dim < self.intrinsic_dim:
            raise ValueError("ambient_dim must be >= intrinsic_dim")
        if not self.coef_scale > 0:
            raise ValueError("coef_scale must be positive")
        if self.monomials_per_coord < 0:
            raise ValueError("monomials_per_coord must be >= 0")

    @property
    def sparsity(self) -> int:
        return self.monomials_per_coord or 3 * self.degree


def monomial_exponents(m: int, degree: int) -> np.ndarray:
    """All exponent vectors in ``m`` variables with total degree <= ``degree``."""
    rows = []

    def rec(prefix, left, k):
        if k == 0:
            rows.append(tuple(prefix))
            return
        for p in range(left + 1):
            rec(prefix + [p], left - p, k - 1)

    rec([], degree, m)
    rows.sort(key=lambda e: (sum(e), e))
    return np.array(rows, dtype=np.int64)


def sample_manifold(spec: ManifoldSpec) -> WeightedPointSet:
    rng = np.random.default_rng(spec.seed)
    m, d = spec.intrinsic_dim, spec.ambient_dim
    expo = monomial_exponents(m, spec.degree)
    n_mono = expo.shape[0]
    k = min(spec.sparsity, n_mono)

    # k random monomials per ambient coordinate
    picks = np.empty((d, k), dtype=np.int64)
    vals = np.empty((d, k))
    for j in range(d):
        picks[j] = rng.choice(n_mono, size=k, replace=False)
        vals[j] = rng.standard_normal(k) * spec.coef_scale
    used, inv = np.unique(picks, return_inverse=True)
    coef = np.zeros((used.size, d))
    coef[inv.reshape(d, k), np.arange(d)[:, None]] = vals

    t = rng.uniform(-1.0, 1.0, size=(spec.n_points, m))
    # feats[i, q] = prod_l t[i, l] ** expo[used[q], l]
    powers = t[:, :, None] ** np.arange(spec.degree + 1)[None, None, :]
    feats = np.ones((spec.n_points, used.size))
    for l in range(m):
        feats *= powers[:, l, expo[used, l]]
    pts = feats @ coef
    return WeightedPointSet(pts, np.ones(spec.n_points))


def sample_pair(n_each: int, ambient_dim: int = 500, intrinsic_dim: int = 2, degree: int = 1, seed: int = 0, coef_scale: float = 1.0):
    """Two independent manifolds, ``n_each`` samples from each."""
    ss = np.random.SeedSequence(seed).spawn(2)
    seeds = [int(s.generate_state(1)[0]) for s in ss]
    a = sample_manifold(ManifoldSpec(n_each, ambient_dim, intrinsic_dim, degree, seeds[0], coef_scale))
    b = sample_manifold(ManifoldSpec(n_each, ambient_dim, intrinsic_dim, degree, seeds[1], coef_scale))
    return a, b
