"""Fast threshold queries on the earth mover's distance via a hierarchical Gonzalez cover."""

from emdquery.config import Tolerances, DEFAULT_TOLERANCES
from emdquery.geometry import WeightedPointSet, distance, approx_radius, pairwise_distances
from emdquery.cover import CoverNode, CoverLevel, gonzalez, split_adaptive, split_fixed_rho, next_level, root_level
from emdquery.transport import (
    TransportInstance,
    TransportPlan,
    solve_exact,
    solve_sinkhorn,
    brute_force_oracle,
    validate_plan,
    diagonal_flow_property_check,
)
from emdquery.query import (
    Verdict,
    QueryParams,
    LevelTrace,
    QueryOutcome,
    SurplusInstance,
    aggregate_level,
    emd_query,
)
from emdquery.datagen import ManifoldSpec, sample_manifold

__version__ = "0.1.0"

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "WeightedPointSet",
    "distance",
    "approx_radius",
    "pairwise_distances",
    "CoverNode",
    "CoverLevel",
    "gonzalez",
    "split_adaptive",
    "split_fixed_rho",
    "next_level",
    "root_level",
    "TransportInstance",
    "TransportPlan",
    "solve_exact",
    "solve_sinkhorn",
    "brute_force_oracle",
    "validate_plan",
    "diagonal_flow_property_check",
    "Verdict",
    "QueryParams",
    "LevelTrace",
    "QueryOutcome",
    "SurplusInstance",
    "aggregate_level",
    "emd_query",
    "ManifoldSpec",
    "sample_manifold",
]
