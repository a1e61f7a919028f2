"""Multi-fiber node architectures: assignment, blocking models and cost."""

from mgon.oxc.assign import (
    NodeAssignment,
    NodeSpec,
    coloring_violations,
    flex_assign,
    hier_k2_assign,
    hrfs_assign,
    hsa_assign,
    lemma_violations,
    random_demand,
)
from mgon.oxc.blocking import blocking_analytic, simulate_blocking
from mgon.oxc.cost import cost_model, s_approx, s_exact

__all__ = [
    "NodeAssignment",
    "NodeSpec",
    "blocking_analytic",
    "coloring_violations",
    "cost_model",
    "flex_assign",
    "hier_k2_assign",
    "hrfs_assign",
    "hsa_assign",
    "lemma_violations",
    "random_demand",
    "s_approx",
    "s_exact",
    "simulate_blocking",
]
