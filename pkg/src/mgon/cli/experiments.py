"""One function per experiment: (params, seed) -> CSV rows as dicts.

Parameters arrive already merged with DEFAULTS, so every function can index
them directly. Rows only hold values derived from the inputs (no timings),
so reruns are byte-identical.
"""

from __future__ import annotations

import math
from pathlib import Path

from mgon.net import TrafficSpec, generate_requests, load_topology, run_requests

COLUMNS = {
    "waveband": ("strategy", "requests", "original_bands", "optimized_bands", "swn"),
    "oxc": ("p", "analytic_bp", "mc_bp", "mc_ci95"),
    "rfbsa": ("alg", "requests", "msu_max", "msu_avg"),
    "placement": ("scheme", "budget", "n_flex_nodes", "metric"),
    "dyn-rsa": ("policy", "seed", "load", "offered_bw", "blocked_bw", "dbr", "msu_avg"),
    "cosched": ("alg", "mode", "jobs", "seed", "makespan", "blocked"),
}

DEFAULTS = {
    "waveband": {"topology": "nsf", "requests": 50, "strategy": "rdc"},
    "oxc": {"arch": "conv", "k": 1, "d": 4, "f": 10, "w": 32, "p": [0.1], "trials": 10000},
    "rfbsa": {
        "topology": "nsf_f5_10",
        "arch": "conv",
        "b": 4,
        "alg": "rfbsa",
        "k": None,
        "requests": 500,
        "sizes": [3, 4, 7],
        "probs": [0.2, 0.5, 0.3],
        "alpha": 1.0,
        "beta": 1.0,
    },
    "placement": {
        "topology": "place5",
        "budget": 89,
        "scheme": "tap",
        "b": 4,
        "requests": 100,
        "sizes": [3, 4, 7],
        "probs": [0.2, 0.5, 0.3],
        "mode": "static",
        "load": 100.0,
        "warmup": 1000,
    },
    "dyn-rsa": {
        "topology": "nsf_f5_10",
        "slots": 352,
        "policy": "ff",
        "routing": "ssp",
        "load": 6800.0,
        "requests": 100000,
        "warmup": 10000,
        "sizes": [3, 4, 7],
        "probs": [0.2, 0.5, 0.3],
        "cache_dir": None,
    },
    "cosched": {
        "topology": "cs5",
        "slots": None,
        "jobs": 5,
        "mode": "static",
        "alg": "ca",
        "alpha": 0.5,
        "beta": 1.0,
        "preset": "small",
        "guard": 2,
        "p_new": 0.5,
        "job_file": None,
    },
}


def _spec(params, rate: float = 1.0) -> TrafficSpec:
    return TrafficSpec(sizes=tuple(params["sizes"]), probs=tuple(params["probs"]), rate=rate)


def run_waveband(params: dict, seed: int) -> list[dict]:
    from mgon.waveband import encode_rwa, first_fit_rwa, identity_bands, solve_bmp, switching_elements

    topo = load_topology(params["topology"])
    reqs = generate_requests(TrafficSpec(), params["requests"], seed, topo)
    demands = [(r.source, r.destination) for r in reqs]
    m = encode_rwa(topo, first_fit_rwa(topo, demands))
    plan = solve_bmp(m, params["strategy"], {"topology": topo, "demands": demands})
    return [
        {
            "strategy": params["strategy"],
            "requests": params["requests"],
            "original_bands": identity_bands(m),
            "optimized_bands": plan.bands,
            "swn": switching_elements(m),
        }
    ]


def run_oxc(params: dict, seed: int) -> list[dict]:
    from mgon.oxc import NodeSpec, blocking_analytic, simulate_blocking

    arch, k = params["arch"], params["k"]
    spec = NodeSpec(params["d"], params["f"], params["w"], arch, k)
    method = "hrfs" if arch == "hier" and k == 1 else "flex"
    ps = params["p"] if isinstance(params["p"], list) else [params["p"]]
    rows = []
    for p in ps:
        mc = simulate_blocking(spec, p, params["trials"], seed, method)
        rows.append({"p": f"{p:g}", "analytic_bp": f"{blocking_analytic(spec, p):.6g}", "mc_bp": f"{mc.mean:.6g}", "mc_ci95": f"{mc.ci95:.3g}"})
    return rows


def run_rfbsa(params: dict, seed: int) -> list[dict]:
    from mgon.rfbsa import Banding, CostParams, run_static

    topo = load_topology(params["topology"])
    reqs = generate_requests(_spec(params), params["requests"], seed, topo)
    banding = Banding.all_flex(topo, params["b"]) if params["arch"] == "flex" else Banding.conv()
    cost = CostParams(params["alpha"], params["beta"])
    run = run_static(topo, reqs, params["alg"], banding, cost, k=params["k"])
    return [{"alg": params["alg"], "requests": params["requests"], "msu_max": run.msu_max, "msu_avg": f"{run.msu_avg:.6f}"}]


def run_placement(params: dict, seed: int) -> list[dict]:
    from mgon.placement import dynamic_pipeline, placement_pipeline

    topo = load_topology(params["topology"])
    if params["mode"] == "dynamic":
        res = dynamic_pipeline(
            topo, params["budget"], _spec(params, params["load"]), params["requests"], params["warmup"], seed, params["scheme"], params["b"]
        )
    else:
        reqs = generate_requests(_spec(params), params["requests"], seed, topo)
        res = placement_pipeline(topo, params["budget"], reqs, params["scheme"], seed, params["b"])
    scheme, budget, n_flex, metric = res.csv_row().split(",")
    return [{"scheme": scheme, "budget": budget, "n_flex_nodes": n_flex, "metric": metric}]


def run_dynrsa(params: dict, seed: int) -> list[dict]:
    from mgon.dynrsa import cached_path_table, make_policy, min_hop_candidates, route_loads, solve_path_lp

    topo = load_topology(params["topology"])
    if params["slots"]:
        topo = topo.with_slots(params["slots"])
    load = float(params["load"])
    spec = _spec(params, load if load > 0 else 1.0)
    table = None
    if params["routing"] == "mps":
        if params["cache_dir"]:
            table = cached_path_table(topo, spec, params["cache_dir"])
        else:
            table = solve_path_lp(topo, min_hop_candidates(topo), route_loads(topo, spec))
    policy = make_policy(topo, params["policy"], params["routing"], spec, table, seed)
    n = params["requests"] if load > 0 else 0
    reqs = generate_requests(spec, params["warmup"] + n, seed, topo, dynamic=True) if n else []
    metrics = run_requests(topo, reqs, policy, warmup=params["warmup"] if n else 0)
    policy_name = f"{params['policy']}+{params['routing']}"
    return [dict(zip(COLUMNS["dyn-rsa"], metrics.csv_row(policy_name, seed, load).split(",")))]


def run_cosched(params: dict, seed: int) -> list[dict]:
    from mgon.cosched import generate_arrivals, generate_jobs, load_jobs, make_cluster, run_dynamic, schedule_jobs, validate_schedule

    topo = load_topology(params["topology"])
    if params["slots"]:
        topo = topo.with_slots(params["slots"])
    net = make_cluster(topo, seed, params["preset"], params["guard"])
    alg, mode = params["alg"], params["mode"]
    if params["job_file"]:
        jobs = load_jobs(params["job_file"])
    elif mode == "dynamic":
        jobs = generate_arrivals(params["jobs"], seed, params["p_new"], params["preset"])
    else:
        jobs = generate_jobs(params["jobs"], seed, params["preset"])
    if mode == "dynamic":
        res = run_dynamic(jobs, net, alg, params["alpha"], params["beta"])
        sched, blocked = res.schedule, res.blocked
        kept = [j for j in jobs if j.id in set(res.admitted)]
        release = {j.id: j.arrival + 1 for j in kept}
    else:
        sched, blocked, kept, release = schedule_jobs(jobs, net, alg, params["alpha"], params["beta"]), 0, jobs, None
    problems = validate_schedule(sched, kept, net, release)
    if problems:
        raise RuntimeError(f"schedule failed validation: {problems[0]}")
    return [{"alg": alg, "mode": mode, "jobs": len(jobs), "seed": seed, "makespan": sched.makespan, "blocked": blocked}]


RUNNERS = {
    "waveband": run_waveband,
    "oxc": run_oxc,
    "rfbsa": run_rfbsa,
    "placement": run_placement,
    "dyn-rsa": run_dynrsa,
    "cosched": run_cosched,
}

# columns averaged in the JSON aggregate
METRICS = {
    "waveband": ("original_bands", "optimized_bands", "swn"),
    "oxc": ("analytic_bp", "mc_bp"),
    "rfbsa": ("msu_max", "msu_avg"),
    "placement": ("n_flex_nodes", "metric"),
    "dyn-rsa": ("dbr", "msu_avg"),
    "cosched": ("makespan", "blocked"),
}


def run_trial(experiment: str, params: dict, seed: int) -> list[dict]:
    merged = {**DEFAULTS[experiment], **params}
    return RUNNERS[experiment](merged, seed)


def mean_ci95(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width."""
    import numpy as np

    x = np.asarray(values, dtype=float)
    if x.size < 2:
        return float(x.mean()) if x.size else math.nan, 0.0
    return float(x.mean()), float(1.96 * x.std(ddof=1) / math.sqrt(x.size))


def topology_exists(name: str) -> bool:
    from mgon.net import data_path

    p = Path(name)
    return p.exists() or data_path(p.name if p.suffix else p.name + ".topo").exists()
