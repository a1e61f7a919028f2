"""Co-scheduling of VMs and contiguous subcarrier bands for DAG jobs."""

from mgon.cosched.generate import PRESETS, JobPreset, generate_arrivals, generate_jobs, make_cluster, random_job
from mgon.cosched.model import (
    LOCAL,
    ClusterNet,
    CycleError,
    Job,
    Schedule,
    TaskSlot,
    TaskWeights,
    Transfer,
    critical_path_bound,
    dump_jobs,
    estimated_deadline,
    layerize,
    load_jobs,
    task_weights,
)
from mgon.cosched.oracle import OracleTooLarge, optimal_makespan
from mgon.cosched.schedule import (
    ALGORITHMS,
    DynamicResult,
    admit_dynamic,
    earliest_transfer,
    job_order,
    run_dynamic,
    schedule_ca,
    schedule_ff,
    schedule_jobs,
)
from mgon.cosched.state import ResourceState
from mgon.cosched.validate import Violation, validate_schedule

__all__ = [n for n in dir() if not n.startswith("_")]
