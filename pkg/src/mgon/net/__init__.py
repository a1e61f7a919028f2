"""Topology, spectrum state, traffic and the discrete-event engine."""

from pathlib import Path

from mgon.net.rng import make_rng, trial_seeds
from mgon.net.sim import CSV_HEADER, SimMetrics, SimulationError, run_dynamic_sim, run_requests
from mgon.net.spectrum import (
    Assignment,
    ConflictingAllocation,
    SpectrumState,
    UnknownConnection,
    availability,
)
from mgon.net.topology import (
    DuplicateLink,
    OutOfRange,
    ParseError,
    Topology,
    TopologyError,
    load_topology,
    parse_topology,
)
from mgon.net.traffic import Request, TrafficSpec, generate_requests


def data_path(name: str) -> Path:
    """Path of a topology file bundled with the package."""
    return Path(__file__).resolve().parent.parent / "data" / name


__all__ = [
    "Assignment",
    "CSV_HEADER",
    "ConflictingAllocation",
    "DuplicateLink",
    "OutOfRange",
    "ParseError",
    "Request",
    "SimMetrics",
    "SimulationError",
    "SpectrumState",
    "Topology",
    "TopologyError",
    "TrafficSpec",
    "UnknownConnection",
    "availability",
    "data_path",
    "generate_requests",
    "load_topology",
    "make_rng",
    "parse_topology",
    "run_dynamic_sim",
    "run_requests",
    "trial_seeds",
]
