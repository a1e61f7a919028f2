"""Dynamic RSA: path-selection LP, spectrum partitioning, next-state-aware bins, baselines."""

from mgon.dynrsa.lp import (
    NoCandidates,
    PathTable,
    cached_path_table,
    min_hop_candidates,
    objective_of,
    route_loads,
    route_of,
    single_path_table,
    solve_path_lp,
)
from mgon.dynrsa.nsa import BinState, ConflictGraph, brute_force_losses, capacity_losses, subset_loss
from mgon.dynrsa.partition import PartitionPlan, PartitionTooSmall, Segment, equal_segments, plan_partitions
from mgon.dynrsa.policies import ROUTINGS, SA_RULES, DynRsaPolicy, make_policy

__all__ = [
    "BinState",
    "ConflictGraph",
    "DynRsaPolicy",
    "NoCandidates",
    "PartitionPlan",
    "PartitionTooSmall",
    "PathTable",
    "ROUTINGS",
    "SA_RULES",
    "Segment",
    "brute_force_losses",
    "cached_path_table",
    "capacity_losses",
    "equal_segments",
    "make_policy",
    "min_hop_candidates",
    "objective_of",
    "plan_partitions",
    "route_loads",
    "route_of",
    "single_path_table",
    "solve_path_lp",
    "subset_loss",
]
