"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # relative slack on |sum(alpha) - sum(beta)|
    balance_rel: float = 1e-9
    # marginal violation allowed in a plan, as a fraction of W
    marginal_abs: float = 1e-7
    # stored vs recomputed plan cost, relative
    cost_rel: float = 1e-9
    # exact-solver optimality slack, as a fraction of W * max distance
    optimality: float = 1e-7
    # cached total weight check
    weight_cache_rel: float = 1e-9
    # per-node surplus at or below this fraction of W counts as cancelled
    surplus_rel: float = 1e-12
    # tie window for the coincident-sets fast path
    degenerate_tie: float = 1e-12
    # largest cost matrix the solvers will materialize
    max_cost_entries: int = 50_000_000


DEFAULT_TOLERANCES = Tolerances()
