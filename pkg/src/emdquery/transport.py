"""Transportation solvers, plan validation and a brute-force oracle.

Solvers return the *unnormalized* cost ``sum f_ij * c_ij``; dividing by the
mass ``W`` is left to callers, since the query divides surplus costs by the
mass of the original instance rather than by the surplus mass.
"""

from __future__ import annotations

import logging
import os
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from emdquery.config import DEFAULT_TOLERANCES, Tolerances
from emdquery.errors import ImbalanceError, SolverError
from emdquery.geometry import WeightedPointSet, distance, pairwise_distances

# POT probes every installed array backend on import; numpy is all we use.
for _backend in ("PYTORCH", "JAX", "TENSORFLOW", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_backend}", "1")
import ot  # noqa: E402

log = logging.getLogger(__name__)

ORACLE_MAX_MASS = 12


@dataclass(frozen=True, eq=False)
class TransportInstance:
    sources: WeightedPointSet
    sinks: WeightedPointSet
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if self.sources.dim != self.sinks.dim:
            raise ValueError(f"dimension mismatch: {self.sources.dim} vs {self.sinks.dim}")
        wa, wb = self.sources.total_weight, self.sinks.total_weight
        if abs(wa - wb) > self.tol.balance_rel * max(wa, wb, 1.0):
            raise ImbalanceError(f"unbalanced instance: {wa!r} vs {wb!r}")

    @classmethod
    def from_arrays(cls, xa, wa, xb, wb, tol: Tolerances = DEFAULT_TOLERANCES) -> "TransportInstance":
        return cls(WeightedPointSet(xa, wa), WeightedPointSet(xb, wb), tol)

    @property
    def mass(self) -> float:
        return self.sources.total_weight

    @property
    def shape(self) -> tuple[int, int]:
        return self.sources.n, self.sinks.n

    def cost_matrix(self) -> np.ndarray:
        n_a, n_b = self.shape
        if n_a * n_b > self.tol.max_cost_entries:
            raise SolverError(f"cost matrix {n_a}x{n_b} exceeds the cap of {self.tol.max_cost_entries} entries")
        c = pairwise_distances(self.sources.points, self.sinks.points)
        if not np.all(np.isfinite(c)):
            raise SolverError("non-finite cost entry")
        return c

    def reversed(self) -> "TransportInstance":
        return TransportInstance(self.sinks, self.sources, self.tol)


@dataclass(frozen=True, eq=False)
class TransportPlan:
    rows: np.ndarray
    cols: np.ndarray
    flows: np.ndarray
    cost: float
    normalized: bool = False
    diagnostics: dict = field(default_factory=dict)

    def as_dense(self, shape: tuple[int, int]) -> np.ndarray:
        out = np.zeros(shape)
        np.add.at(out, (self.rows, self.cols), self.flows)
        return out

    def emd(self, mass: float) -> float:
        return self.cost / mass if mass > 0 else 0.0


def _plan_from_dense(g: np.ndarray, c: np.ndarray, **diagnostics) -> TransportPlan:
    rows, cols = np.nonzero(g > 0)
    vals = g[rows, cols]
    cost = float(np.dot(vals, c[rows, cols]))
    return TransportPlan(rows, cols, vals, cost, False, diagnostics)


def _balanced_marginals(inst: TransportInstance) -> tuple[np.ndarray, np.ndarray]:
    a = np.array(inst.sources.weights)
    b = np.array(inst.sinks.weights)
    sb = b.sum()
    if sb > 0:
        b *= a.sum() / sb
    return a, b


def solve_exact(inst: TransportInstance) -> TransportPlan:
    """Optimal plan via network simplex (POT's ``emd``)."""
    c = inst.cost_matrix()
    a, b = _balanced_marginals(inst)
    n_a, n_b = inst.shape
    max_iter = max(100_000, 100 * (n_a + n_b) ** 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        g, info = ot.emd(a, b, c, numItermax=max_iter, log=True, check_marginals=False)
    if info["result_code"] != 1:
        raise SolverError(f"network simplex did not reach optimality: {info['warning']}")
    return _plan_from_dense(g, c, solver="network_simplex")


def round_to_feasible(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project an approximate plan onto the transportation polytope.

    Rows, then columns, are scaled down to their marginals; the leftover
    mass is put back as a rank-one correction. The result has exactly the
    prescribed marginals (up to rounding) and stays nonnegative.
    """
    rs = p.sum(axis=1)
    x = np.minimum(np.divide(a, rs, out=np.ones_like(a), where=rs > 0), 1.0)
    p = p * x[:, None]
    cs = p.sum(axis=0)
    y = np.minimum(np.divide(b, cs, out=np.ones_like(b), where=cs > 0), 1.0)
    p = p * y[None, :]
    err_r = np.maximum(a - p.sum(axis=1), 0.0)
    err_c = np.maximum(b - p.sum(axis=0), 0.0)
    s = err_r.sum()
    if s > 0:
        p = p + np.outer(err_r, err_c) / s
    return p


def _sinkhorn_log_stabilized(c, a, b, reg, max_iter, tol, check_every=10, absorb_at=50.0):
    """Sinkhorn scaling with log-domain absorption.

    Potentials ``f, g`` carry the large magnitudes; the scalings ``u, v``
    stay moderate and get folded into the potentials whenever ``|log u|`` or
    ``|log v|`` passes ``absorb_at``, so the kernel never underflows to an
    all-zero row.
    """
    la, lb = np.log(a), np.log(b)
    mass = a.sum()

    def log_step(f, g):
        f = reg * (la - logsumexp((g[None, :] - c) / reg, axis=1))
        g = reg * (lb - logsumexp((f[:, None] - c) / reg, axis=0))
        return f, g

    f, g = log_step(np.zeros(a.shape[0]), np.zeros(b.shape[0]))
    k = np.exp((f[:, None] + g[None, :] - c) / reg)
    u = np.ones_like(a)
    v = np.ones_like(b)
    err = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        kv = k @ v
        with np.errstate(divide="ignore"):
            u = a / kv
        ktu = k.T @ u
        with np.errstate(divide="ignore"):
            v = b / ktu
        unstable = not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and u.min() > 0 and v.min() > 0)
        if unstable:
            # fall back to one exact log-domain sweep from the last absorbed potentials
            f, g = log_step(f, g)
            k = np.exp((f[:, None] + g[None, :] - c) / reg)
            u = np.ones_like(a)
            v = np.ones_like(b)
        elif max(np.abs(np.log(u)).max(), np.abs(np.log(v)).max()) > absorb_at:
            f = f + reg * np.log(u)
            g = g + reg * np.log(v)
            k = np.exp((f[:, None] + g[None, :] - c) / reg)
            u = np.ones_like(a)
            v = np.ones_like(b)
        if it % check_every == 0 or it == max_iter:
            err = float(np.abs(u * (k @ v) - a).sum())
            if err <= tol * mass:
                break
    p = u[:, None] * k * v[None, :]
    return p, err, it


def solve_sinkhorn(
    inst: TransportInstance,
    reg: Optional[float] = None,
    max_iter: int = 10_000,
    tol: float = 1e-6,
) -> TransportPlan:
    """Entropic transport, rounded to an exactly feasible plan.

    ``reg`` defaults to 2% of the largest ground distance. Because the
    returned plan is feasible, its cost upper-bounds the optimum. Hitting
    ``max_iter`` is reported in ``diagnostics['converged']``, not raised.
    """
    c = inst.cost_matrix()
    cmax = float(c.max())
    if reg is None:
        reg = 0.02 * cmax if cmax > 0 else 1.0
    if not reg > 0:
        raise ValueError("regularization must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    a, b = _balanced_marginals(inst)
    # zero-mass rows/columns carry no flow; drop them so logs stay finite
    ra = np.flatnonzero(a > 0)
    cb = np.flatnonzero(b > 0)
    full = np.zeros(c.shape)
    if ra.size == 0:
        return _plan_from_dense(full, c, solver="sinkhorn", converged=True, iterations=0, marginal_error=0.0, reg=reg)
    a_s, b_s, c_s = a[ra], b[cb], c[np.ix_(ra, cb)]
    p, err, iters = _sinkhorn_log_stabilized(c_s, a_s, b_s, reg, max_iter, tol)
    converged = err <= tol * a_s.sum()
    if not converged:
        log.info("sinkhorn stopped after %d iterations, marginal error %.3g", iters, err)
    full[np.ix_(ra, cb)] = round_to_feasible(p, a_s, b_s)
    return _plan_from_dense(
        full, c, solver="sinkhorn", converged=bool(converged), iterations=iters, marginal_error=err, reg=reg
    )


@dataclass(frozen=True)
class PlanReport:
    ok: bool
    negative_flows: tuple
    max_row_violation: float
    max_col_violation: float
    cost_discrepancy: float

    def __bool__(self) -> bool:
        return self.ok


def validate_plan(inst: TransportInstance, plan: TransportPlan, tol: Optional[Tolerances] = None) -> PlanReport:
    tol = inst.tol if tol is None else tol
    n_a, n_b = inst.shape
    if plan.rows.size and (plan.rows.max() >= n_a or plan.cols.max() >= n_b or min(plan.rows.min(), plan.cols.min()) < 0):
        raise ValueError("plan indices do not fit the instance")
    neg = tuple(
        (int(i), int(j), float(f)) for i, j, f in zip(plan.rows, plan.cols, plan.flows) if f < 0
    )
    row = np.bincount(plan.rows, weights=plan.flows, minlength=n_a)
    col = np.bincount(plan.cols, weights=plan.flows, minlength=n_b)
    row_v = float(np.abs(row - inst.sources.weights).max())
    col_v = float(np.abs(col - inst.sinks.weights).max())
    if plan.rows.size:
        c = np.sqrt(((inst.sources.points[plan.rows] - inst.sinks.points[plan.cols]) ** 2).sum(axis=1))
        recomputed = float(np.dot(plan.flows, c))
    else:
        recomputed = 0.0
    disc = abs(recomputed - plan.cost)
    w = inst.mass
    ok = (
        not neg
        and row_v <= tol.marginal_abs * max(w, 1.0)
        and col_v <= tol.marginal_abs * max(w, 1.0)
        and disc <= tol.cost_rel * max(abs(recomputed), 1e-300) + 1e-12 * max(w, 1.0)
    )
    return PlanReport(ok, neg, row_v, col_v, disc)


def _integral_weights(w: np.ndarray) -> tuple:
    out = []
    for x in w:
        if x != np.floor(x):
            raise ValueError(f"oracle needs integer weights, got {x!r}")
        out.append(int(x))
    return tuple(out)


def brute_force_oracle(inst: TransportInstance) -> float:
    """Minimum cost over every integral feasible flow.

    Sources are filled one at a time; each source's mass is split over the
    sinks in every admissible way. The search is memoized on the vector of
    remaining sink capacities, which keeps it exhaustive but cheap. Exact
    because the transportation polytope has integral vertices.
    """
    alpha = _integral_weights(inst.sources.weights)
    beta = _integral_weights(inst.sinks.weights)
    if sum(alpha) != sum(beta):
        raise ValueError("oracle needs equal integral masses")
    if sum(alpha) > ORACLE_MAX_MASS:
        raise ValueError(f"oracle limited to total mass <= {ORACLE_MAX_MASS}")
    xa, xb = inst.sources.points, inst.sinks.points
    cost = [[distance(xa[i], xb[j]) for j in range(len(beta))] for i in range(len(alpha))]

    def splits(mass, caps, j):
        # every way to place `mass` units on sinks j.. under capacities `caps`
        if j == len(caps):
            if mass == 0:
                yield ()
            return
        for q in range(min(mass, caps[j]), -1, -1):
            for rest in splits(mass - q, caps, j + 1):
                yield (q,) + rest

    @lru_cache(maxsize=None)
    def best(i, caps):
        if i == len(alpha):
            return 0.0 if sum(caps) == 0 else float("inf")
        out = float("inf")
        for s in splits(alpha[i], caps, 0):
            here = sum(q * cost[i][j] for j, q in enumerate(s) if q)
            rem = tuple(c - q for c, q in zip(caps, s))
            out = min(out, here + best(i + 1, rem))
        return out

    return best(0, beta)


def cancel_colocated(points: np.ndarray, src_w: np.ndarray, snk_w: np.ndarray, atol: float = 0.0):
    """Offset co-located source and sink mass point by point.

    Returns ``(src_points, src_weights, snk_points, snk_weights)``; a point
    keeps only its surplus on the heavier side and is dropped when the two
    sides agree to within ``atol`` (summation noise).
    """
    src_w = np.asarray(src_w, dtype=np.float64)
    snk_w = np.asarray(snk_w, dtype=np.float64)
    diff = src_w - snk_w
    pos = diff > atol
    neg = diff < -atol
    return points[pos], diff[pos], points[neg], -diff[neg]


def diagonal_flow_property_check(inst: TransportInstance, tol: Optional[Tolerances] = None) -> bool:
    """Cancelling co-located mass leaves the optimal cost unchanged.

    ``inst`` must pair source ``j`` with sink ``j`` at identical coordinates.
    The full instance and its cancelled surplus instance are both solved
    exactly and their costs compared.
    """
    tol = inst.tol if tol is None else tol
    xa, xb = inst.sources.points, inst.sinks.points
    if xa.shape != xb.shape or not np.array_equal(xa, xb):
        raise ValueError("sources and sinks must be co-located pairwise")
    full_cost = solve_exact(inst).cost
    pa, wa, pb, wb = cancel_colocated(xa, inst.sources.weights, inst.sinks.weights)
    if wa.size == 0 and wb.size == 0:
        reduced_cost = 0.0
    else:
        reduced_cost = solve_exact(TransportInstance.from_arrays(pa, wa, pb, wb, tol)).cost
    scale = inst.mass * float(pairwise_distances(xa, xb).max()) if xa.shape[0] > 1 else 0.0
    return abs(full_cost - reduced_cost) <= tol.optimality * scale + 1e-12
