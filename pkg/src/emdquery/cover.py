"""Simplified net tree: a hierarchical Gonzalez cover built one level at a time.

Only the covering property is maintained. Each level partitions the index set
of ``P`` into balls around member points; a level is derived from the previous
one alone, so callers never need more than two levels in memory.

Two equivalent code paths exist. ``gonzalez``/``split_adaptive``/
``split_fixed_rho`` work on one node at a time and are the readable
reference. ``next_level`` splits every node of a level in lockstep with
vectorized rounds and must return exactly what the per-node path returns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

MAX_RHO = 15


@dataclass(frozen=True, eq=False)
class CoverNode:
    center_index: int
    member_ids: np.ndarray
    level: int
    radius_bound: float
    is_leaf: bool

    @property
    def size(self) -> int:
        return int(self.member_ids.shape[0])

    def center(self, points: np.ndarray) -> np.ndarray:
        return points[self.center_index]


@dataclass(frozen=True, eq=False)
class CoverLevel:
    level: int
    nodes: tuple
    target_radius: float

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def leaf_count(self) -> int:
        return sum(1 for v in self.nodes if v.is_leaf)

    def labels(self, n_points: int) -> np.ndarray:
        """Node ordinal of every point of ``P`` (-1 if uncovered)."""
        out = np.full(n_points, -1, dtype=np.int64)
        for j, v in enumerate(self.nodes):
            out[v.member_ids] = j
        return out

    def center_indices(self) -> np.ndarray:
        return np.fromiter((v.center_index for v in self.nodes), dtype=np.int64, count=len(self.nodes))


def _dist_rows(points: np.ndarray, ids: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # row-wise distances points[ids[k]] <-> points[centers[k]]; shared by both code paths
    diff = points[ids] - points[centers]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _make_leaf_flag(size: int, radius: float) -> bool:
    return size == 1 or radius == 0.0


class _Traversal:
    """Farthest-point traversal over a fixed subset, one round per ``step``."""

    def __init__(self, points: np.ndarray, ids: np.ndarray, seed_index: int):
        self.points = points
        self.ids = np.asarray(ids, dtype=np.int64)
        self.centers = [int(seed_index)]
        self.mind = _dist_rows(points, self.ids, np.full(self.ids.shape[0], seed_index, dtype=np.int64))
        self.owner = np.zeros(self.ids.shape[0], dtype=np.int64)

    @property
    def radius(self) -> float:
        return float(self.mind.max())

    def step(self) -> bool:
        far = int(np.argmax(self.mind))  # first maximum: lowest index among ties
        if self.mind[far] == 0.0:
            return False
        c = int(self.ids[far])
        d = _dist_rows(self.points, self.ids, np.full(self.ids.shape[0], c, dtype=np.int64))
        closer = d < self.mind
        self.mind = np.where(closer, d, self.mind)
        self.owner[closer] = len(self.centers)
        self.centers.append(c)
        return True

    def children(self, level: int) -> list:
        out = []
        for k, c in enumerate(self.centers):
            mask = self.owner == k
            members = self.ids[mask]
            radius = float(self.mind[mask].max())
            out.append(CoverNode(c, members, level, radius, _make_leaf_flag(members.shape[0], radius)))
        return out


def gonzalez(points: np.ndarray, ids, k: int, seed_index: int):
    """Greedy k-center on ``points[ids]`` starting from ``seed_index``.

    Returns the chosen center indices (global), the center ordinal assigned
    to each entry of ``ids``, and the largest point-to-center distance. Fewer
    than ``k`` centers come back when every point already coincides with a
    center.
    """
    ids = np.sort(np.asarray(ids, dtype=np.int64))
    if ids.size == 0:
        raise ValueError("empty subset")
    if k < 1:
        raise ValueError("k must be >= 1")
    if seed_index not in set(ids.tolist()):
        raise ValueError("seed must belong to the subset")
    tr = _Traversal(points, ids, seed_index)
    while len(tr.centers) < k and tr.step():
        pass
    return np.array(tr.centers, dtype=np.int64), tr.owner.copy(), tr.radius


def split_adaptive(node: CoverNode, points: np.ndarray, target: float) -> list:
    """Add Gonzalez rounds until every cluster has radius <= ``target``."""
    if node.is_leaf:
        raise ValueError("cannot split a leaf node")
    if not target > 0:
        raise ValueError("target radius must be positive")
    tr = _Traversal(points, node.member_ids, node.center_index)
    while tr.radius > target:
        tr.step()
    return tr.children(node.level + 1)


def split_fixed_rho(node: CoverNode, points: np.ndarray, rho: int) -> list:
    """Run exactly ``4**rho`` rounds (fewer only if all points are centers)."""
    if node.is_leaf:
        raise ValueError("cannot split a leaf node")
    if not 1 <= rho <= MAX_RHO:
        raise ValueError(f"rho must lie in [1, {MAX_RHO}]")
    k = 4**rho
    tr = _Traversal(points, node.member_ids, node.center_index)
    while len(tr.centers) < k and tr.step():
        pass
    return tr.children(node.level + 1)


def root_level(n_points: int, points: np.ndarray, center_index: int = 0) -> CoverLevel:
    ids = np.arange(n_points, dtype=np.int64)
    radius = float(_dist_rows(points, ids, np.full(n_points, center_index, dtype=np.int64)).max())
    node = CoverNode(int(center_index), ids, 0, radius, _make_leaf_flag(n_points, radius))
    return CoverLevel(0, (node,), math.inf)


def next_level(current: CoverLevel, points: np.ndarray, target: float, rho: Optional[int] = None) -> CoverLevel:
    """Refine ``current`` so that every ball has radius <= ``target``.

    ``rho=None`` is the adaptive mode. With an integer ``rho`` each node first
    receives ``4**rho`` rounds; if that still leaves a cluster wider than
    ``target`` (``rho`` underestimated), rounds continue until the target is
    met so the covering guarantee survives.
    """
    if not target > 0:
        raise ValueError("target radius must be positive")
    if not target < current.target_radius:
        raise ValueError("target radius must shrink from one level to the next")
    if rho is not None and not 1 <= rho <= MAX_RHO:
        raise ValueError(f"rho must lie in [1, {MAX_RHO}]")
    min_rounds = 1 if rho is None else 4**rho
    level = current.level + 1

    inner = [v for v in current.nodes if not v.is_leaf]
    if not inner:
        return CoverLevel(level, current.nodes, target)

    sizes = np.fromiter((v.size for v in inner), dtype=np.int64, count=len(inner))
    starts = np.zeros(len(inner), dtype=np.int64)
    np.cumsum(sizes[:-1], out=starts[1:])
    order = np.concatenate([np.sort(v.member_ids) for v in inner])
    seg = np.repeat(np.arange(len(inner)), sizes)
    pos = np.arange(order.shape[0], dtype=np.int64)

    seeds = np.fromiter((v.center_index for v in inner), dtype=np.int64, count=len(inner))
    centers = [seeds]  # centers[r][node] = center chosen in round r (-1 if the node stopped)
    mind = _dist_rows(points, order, seeds[seg])
    owner = np.zeros(order.shape[0], dtype=np.int64)
    seg_max = np.maximum.reduceat(mind, starts)
    n_rounds = np.ones(len(inner), dtype=np.int64)

    while True:
        active = (seg_max > 0) & ((seg_max > target) | (n_rounds < min_rounds))
        if not active.any():
            break
        # farthest element per active node, first position on ties
        is_far = mind == seg_max[seg]
        first = np.minimum.reduceat(np.where(is_far, pos, order.shape[0]), starts)
        new_c = np.full(len(inner), -1, dtype=np.int64)
        new_c[active] = order[first[active]]
        centers.append(new_c)

        el = np.flatnonzero(active[seg])
        d = _dist_rows(points, order[el], new_c[seg[el]])
        closer = d < mind[el]
        upd = el[closer]
        mind[upd] = d[closer]
        owner[upd] = len(centers) - 1
        n_rounds[active] += 1
        seg_max = np.maximum.reduceat(mind, starts)

    # group by (node, owning round); member ids stay ascending inside each child
    key = np.lexsort((order, owner, seg))
    order_s, owner_s, seg_s, mind_s = order[key], owner[key], seg[key], mind[key]
    brk = np.flatnonzero((np.diff(owner_s) != 0) | (np.diff(seg_s) != 0)) + 1
    grp_start = np.concatenate(([0], brk))
    grp_end = np.concatenate((brk, [order_s.shape[0]]))
    grp_rad = np.maximum.reduceat(mind_s, grp_start)
    center_table = np.stack(centers)

    children_of: dict = {}
    for g0, g1, r in zip(grp_start.tolist(), grp_end.tolist(), grp_rad.tolist()):
        node_j = int(seg_s[g0])
        c = int(center_table[owner_s[g0], node_j])
        members = order_s[g0:g1]
        children_of.setdefault(node_j, []).append(
            CoverNode(c, members, level, r, _make_leaf_flag(g1 - g0, r))
        )

    nodes = []
    j = 0
    for v in current.nodes:
        if v.is_leaf:
            nodes.append(v)
        else:
            nodes.extend(children_of[j])
            j += 1
    return CoverLevel(level, tuple(nodes), target)


def next_level_sequential(current: CoverLevel, points: np.ndarray, target: float, rho: Optional[int] = None) -> CoverLevel:
    """Node-by-node counterpart of ``next_level``; used to cross-check it."""
    min_rounds = 1 if rho is None else 4**rho
    level = current.level + 1
    nodes = []
    for v in current.nodes:
        if v.is_leaf:
            nodes.append(v)
            continue
        tr = _Traversal(points, np.sort(v.member_ids), v.center_index)
        while (tr.radius > target or len(tr.centers) < min_rounds) and tr.step():
            pass
        nodes.extend(tr.children(level))
    return CoverLevel(level, tuple(nodes), target)


def check_level(level: CoverLevel, points: np.ndarray, n_points: Optional[int] = None) -> tuple[bool, float]:
    """Partition and covering check; returns (ok, max member-to-center distance)."""
    n = points.shape[0] if n_points is None else n_points
    seen = np.zeros(n, dtype=np.int64)
    worst = 0.0
    for v in level.nodes:
        seen[v.member_ids] += 1
        if v.center_index not in set(v.member_ids.tolist()):
            return False, math.inf
        d = _dist_rows(points, v.member_ids, np.full(v.size, v.center_index, dtype=np.int64))
        worst = max(worst, float(d.max()))
    ok = bool(np.all(seen == 1)) and bool(worst <= level.target_radius)
    return ok, worst


def dump_level_csv(level: CoverLevel, fh, header: bool = True) -> None:
    w = csv.writer(fh)
    if header:
        w.writerow(["level", "node_id", "center_index", "member_count", "radius_bound"])
    for j, v in enumerate(level.nodes):
        w.writerow([level.level, j, v.center_index, v.size, repr(v.radius_bound)])


def iter_levels(points: np.ndarray, targets: Sequence[float], rho: Optional[int] = None, center_index: int = 0):
    """Yield successive levels for the given radius schedule, keeping one level alive."""
    cur = root_level(points.shape[0], points, center_index)
    for t in targets:
        cur = next_level(cur, points, t, rho)
        yield cur
