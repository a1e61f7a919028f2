"""Joint routing, fiber, band and spectrum assignment on layered graphs."""

from mgon.rfbsa.baselines import spff_route
from mgon.rfbsa.core import (
    Banding,
    Candidate,
    CostParams,
    Lightpath,
    RouteResult,
    commit,
    path_cost,
    rfbsa_route,
    spectrum_cost,
    switching_cost,
)
from mgon.rfbsa.oracle import OracleTooLarge, exhaustive_min_msu
from mgon.rfbsa.static import (
    ALGORITHMS,
    RfbsaPolicy,
    StaticRun,
    msu_metrics,
    route_one,
    run_static,
    static_capacity,
    validate,
)

__all__ = [
    "ALGORITHMS",
    "Banding",
    "Candidate",
    "CostParams",
    "Lightpath",
    "OracleTooLarge",
    "RfbsaPolicy",
    "RouteResult",
    "StaticRun",
    "commit",
    "exhaustive_min_msu",
    "msu_metrics",
    "path_cost",
    "rfbsa_route",
    "route_one",
    "run_static",
    "spectrum_cost",
    "spff_route",
    "static_capacity",
    "switching_cost",
    "validate",
]
