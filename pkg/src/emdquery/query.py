"""Hierarchical EMD threshold query.

The cover of ``P = A u B`` is refined level by level, radius ``dt / 2**(i-1)``
at level ``i`` where ``dt`` is the approximate enclosing radius. At each level
the A-mass and B-mass inside every ball are offset against each other at the
ball's center, and the small surplus instance that remains is solved. Its
cost over the original mass ``W`` is within ``dt / 2**(i-3)`` of the true
EMD, so the loop stops as soon as that band clears the threshold.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from emdquery.config import DEFAULT_TOLERANCES, Tolerances
from emdquery.cover import CoverLevel, MAX_RHO, next_level, root_level
from emdquery.errors import ImbalanceError
from emdquery.geometry import WeightedPointSet, approx_radius, distance
from emdquery.transport import TransportInstance, cancel_colocated, solve_exact, solve_sinkhorn


class Verdict(str, enum.Enum):
    CASE1 = "CASE1"  # EMD > T
    CASE2 = "CASE2"  # EMD < T
    CASE3 = "CASE3"  # unresolved: EMD within eps * dt of T

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class QueryParams:
    threshold: float
    epsilon: float
    solver: str = "exact"
    sinkhorn_reg: Optional[float] = None
    sinkhorn_max_iter: int = 10_000
    sinkhorn_tol: float = 1e-6
    rho: Optional[int] = None  # None: adaptive splitting

    def __post_init__(self):
        if not (math.isfinite(self.threshold) and self.threshold >= 0):
            raise ValueError("threshold must be finite and >= 0")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.solver not in ("exact", "sinkhorn"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.sinkhorn_reg is not None and not self.sinkhorn_reg > 0:
            raise ValueError("sinkhorn_reg must be positive")
        if self.rho is not None and not 1 <= self.rho <= MAX_RHO - 1:
            raise ValueError(f"rho must lie in [1, {MAX_RHO - 1}]")

    @property
    def h_max(self) -> int:
        return max_height(self.epsilon)


def max_height(epsilon: float) -> int:
    return math.ceil(math.log2(1.0 / epsilon)) + 5


def band(delta_tilde: float, level: int) -> float:
    return delta_tilde / 2.0 ** (level - 3)


@dataclass(frozen=True)
class LevelTrace:
    level: int
    node_count: int
    leaf_count: int
    surplus_sources: int
    surplus_sinks: int
    surplus_mass: float
    target_radius: float
    estimate: float
    band: float
    cover_time_s: float
    solve_time_s: float

    @property
    def elapsed_s(self) -> float:
        return self.cover_time_s + self.solve_time_s


@dataclass(frozen=True)
class QueryOutcome:
    verdict: Verdict
    levels: tuple
    delta_tilde: float
    h_max: int
    threshold: float
    epsilon: float
    total_weight: float
    direct_emd: Optional[float] = None  # set only on the coincident-sets path
    elapsed_s: float = 0.0

    @property
    def height(self) -> int:
        return self.levels[-1].level if self.levels else 0

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "delta_tilde": self.delta_tilde,
            "h_max": self.h_max,
            "threshold": self.threshold,
            "epsilon": self.epsilon,
            "total_weight": self.total_weight,
            "direct_emd": self.direct_emd,
            "elapsed_s": self.elapsed_s,
            "levels": [],
        }
        for t in self.levels:
            row = asdict(t)
            row["elapsed_s"] = t.elapsed_s
            out["levels"].append(row)
        return out


@dataclass(frozen=True, eq=False)
class SurplusInstance:
    """Per-level reduced instance: ball centers carrying uncancelled mass."""

    source_points: np.ndarray
    source_weights: np.ndarray
    sink_points: np.ndarray
    sink_weights: np.ndarray
    total_weight: float
    node_count: int = 0

    @property
    def is_empty(self) -> bool:
        return self.source_weights.size == 0 and self.sink_weights.size == 0

    @property
    def surplus_mass(self) -> float:
        return float(self.source_weights.sum())

    def to_transport(self, tol: Tolerances = DEFAULT_TOLERANCES) -> TransportInstance:
        return TransportInstance.from_arrays(
            self.source_points, self.source_weights, self.sink_points, self.sink_weights, tol
        )


def _check_pair(a: WeightedPointSet, b: WeightedPointSet, tol: Tolerances) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    wa, wb = a.total_weight, b.total_weight
    if abs(wa - wb) > tol.balance_rel * max(wa, wb, 1.0):
        raise ImbalanceError(f"total weights differ: {wa!r} vs {wb!r}")
    if wa <= 0:
        raise ValueError("total weight must be positive")


def aggregate_level(
    level: CoverLevel,
    a: WeightedPointSet,
    b: WeightedPointSet,
    points: Optional[np.ndarray] = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SurplusInstance:
    """Offset A-mass against B-mass inside each node of ``level``.

    ``level`` must partition the indices of ``P``: A's points first, then B's.
    """
    _check_pair(a, b, tol)
    if points is None:
        points = np.vstack((a.points, b.points))
    n_a = a.n
    labels = level.labels(points.shape[0])
    if labels.min() < 0:
        raise ValueError("level does not cover every point")
    k = len(level.nodes)
    n_j = np.bincount(labels[:n_a], weights=a.weights, minlength=k)
    m_j = np.bincount(labels[n_a:], weights=b.weights, minlength=k)
    centers = points[level.center_indices()]
    pa, wa, pb, wb = cancel_colocated(centers, n_j, m_j, tol.surplus_rel * a.total_weight)
    return SurplusInstance(pa, wa, pb, wb, a.total_weight, k)


def _surplus_cost(s: SurplusInstance, params: QueryParams, tol: Tolerances) -> float:
    if s.is_empty:
        return 0.0
    inst = s.to_transport(tol)
    if params.solver == "exact":
        return solve_exact(inst).cost
    return solve_sinkhorn(inst, params.sinkhorn_reg, params.sinkhorn_max_iter, params.sinkhorn_tol).cost


def emd_query(
    a: WeightedPointSet,
    b: WeightedPointSet,
    params: QueryParams,
    tol: Tolerances = DEFAULT_TOLERANCES,
    on_level: Optional[Callable[[LevelTrace], None]] = None,
) -> QueryOutcome:
    """Decide whether EMD(A, B) lies above or below ``params.threshold``.

    Returns CASE1 (EMD > T), CASE2 (EMD < T) or CASE3 when the tree reached
    its maximum height without separating EMD from T. With the exact solver,
    CASE1/CASE2 are always correct and CASE3 only occurs when
    ``|EMD - T| <= eps * dt``.
    """
    t_start = time.perf_counter()
    _check_pair(a, b, tol)
    T, W = params.threshold, a.total_weight
    h_max = params.h_max
    delta_tilde = max(approx_radius(a)[0], approx_radius(b)[0])

    if delta_tilde == 0.0:
        # both sets collapse to a single location each
        emd = distance(a.points[0], b.points[0])
        if abs(emd - T) <= tol.degenerate_tie * max(1.0, T):
            verdict = Verdict.CASE3
        else:
            verdict = Verdict.CASE1 if emd > T else Verdict.CASE2
        return QueryOutcome(verdict, (), 0.0, h_max, T, params.epsilon, W, emd, time.perf_counter() - t_start)

    points = np.vstack((a.points, b.points))
    rho = None if params.rho is None else params.rho + 1  # A u B doubles the doubling constant
    current = root_level(points.shape[0], points, 0)
    traces = []
    verdict = Verdict.CASE3
    for i in range(1, h_max + 1):
        t0 = time.perf_counter()
        target = delta_tilde / 2.0 ** (i - 1)
        current = next_level(current, points, target, rho)  # previous level is dropped here
        surplus = aggregate_level(current, a, b, points, tol)
        t1 = time.perf_counter()
        est = _surplus_cost(surplus, params, tol) / W
        t2 = time.perf_counter()
        bw = band(delta_tilde, i)
        tr = LevelTrace(
            i,
            len(current.nodes),
            current.leaf_count,
            int(surplus.source_weights.size),
            int(surplus.sink_weights.size),
            surplus.surplus_mass,
            target,
            est,
            bw,
            t1 - t0,
            t2 - t1,
        )
        traces.append(tr)
        if on_level is not None:
            on_level(tr)
        if est >= T + bw:
            verdict = Verdict.CASE1
            break
        if est <= T - bw:
            verdict = Verdict.CASE2
            break
    return QueryOutcome(
        verdict, tuple(traces), delta_tilde, h_max, T, params.epsilon, W, None, time.perf_counter() - t_start
    )


def expected_verdicts(emd: float, threshold: float, epsilon: float, delta_tilde: float) -> frozenset:
    """Verdicts the exact-solver query may return for a known EMD."""
    slack = epsilon * delta_tilde
    if emd - threshold > slack:
        return frozenset({Verdict.CASE1})
    if threshold - emd > slack:
        return frozenset({Verdict.CASE2})
    out = {Verdict.CASE3}
    if emd >= threshold:
        out.add(Verdict.CASE1)
    if emd <= threshold:
        out.add(Verdict.CASE2)
    return frozenset(out)
