"""Experiment configs: YAML with a schema version, validated before anything runs.

    schema_version: 1
    experiment: dyn-rsa
    params: {policy: ff, routing: ssp}
    sweep: {load: [6000, 7000]}     # optional; cartesian product
    seeds: [1, 2, 3]                # or trials: N (seeds 0..N-1)
    out: results/ff-ssp             # optional
"""

from __future__ import annotations

import hashlib
import itertools
import json
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml

import mgon
from mgon.cli.experiments import COLUMNS, DEFAULTS, METRICS, mean_ci95, run_trial

SCHEMA_VERSION = 1

_num = {"type": "number"}
_int = {"type": "integer"}
_str = {"type": "string"}
_ints = {"type": "array", "items": _int, "minItems": 1}
_nums = {"type": "array", "items": _num, "minItems": 1}


def _enum(*v):
    return {"enum": list(v)}


PARAM_SCHEMAS = {
    "waveband": {"topology": _str, "requests": _int, "strategy": _enum("nn", "rdc", "st", "oracle")},
    "oxc": {
        "arch": _enum("conv", "hier"),
        "k": _int,
        "d": _int,
        "f": _int,
        "w": _int,
        "p": {"oneOf": [_num, _nums]},
        "trials": _int,
    },
    "rfbsa": {
        "topology": _str,
        "arch": _enum("conv", "flex"),
        "b": _int,
        "alg": _enum("rfbsa", "spff", "kspff", "spfbsa"),
        "k": {"type": ["integer", "null"]},
        "requests": _int,
        "sizes": _ints,
        "probs": _nums,
        "alpha": _num,
        "beta": _num,
    },
    "placement": {
        "topology": _str,
        "budget": _int,
        "scheme": _enum("rp", "tap", "best"),
        "b": _int,
        "requests": _int,
        "sizes": _ints,
        "probs": _nums,
        "mode": _enum("static", "dynamic"),
        "load": _num,
        "warmup": _int,
    },
    "dyn-rsa": {
        "topology": _str,
        "slots": {"type": ["integer", "null"]},
        "policy": _enum("r", "ff", "flf", "pd-ff", "mk", "nsa", "nsa-shared"),
        "routing": _enum("mps", "ssp"),
        "load": _num,
        "requests": _int,
        "warmup": _int,
        "sizes": _ints,
        "probs": _nums,
        "cache_dir": {"type": ["string", "null"]},
    },
    "cosched": {
        "topology": _str,
        "slots": {"type": ["integer", "null"]},
        "jobs": _int,
        "mode": _enum("static", "dynamic"),
        "alg": _enum("ff", "ca"),
        "alpha": _num,
        "beta": _num,
        "preset": _enum("small", "nsf"),
        "guard": _int,
        "p_new": _num,
        "job_file": {"type": ["string", "null"]},
    },
}


def _experiment_schema(name: str) -> dict:
    props = PARAM_SCHEMAS[name]
    return {
        "if": {"properties": {"experiment": {"const": name}}},
        "then": {
            "properties": {
                "params": {"type": "object", "properties": props, "additionalProperties": False},
                "sweep": {
                    "type": "object",
                    "propertyNames": {"enum": sorted(props)},
                    "additionalProperties": {"type": "array", "minItems": 1},
                },
            }
        },
    }


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "experiment"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"enum": sorted(PARAM_SCHEMAS)},
        "params": {"type": "object"},
        "sweep": {"type": "object"},
        "seeds": {"type": "array", "items": _int, "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "out": _str,
    },
    "allOf": [_experiment_schema(n) for n in PARAM_SCHEMAS],
}


class ConfigError(ValueError):
    pass


def validate_config(data) -> dict:
    """Raise ConfigError naming the offending key; return the config unchanged."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<top level>"
        raise ConfigError(f"config error at {where}: {e.message}")
    return data


def load_config(path: str | Path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return validate_config(data)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def version_string() -> str:
    """git describe of the source tree when available, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{mgon.__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return mgon.__version__


@dataclass
class RunRecord:
    experiment: str
    config_hash: str
    version: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)  # one per trial (and sweep point)
    aggregate: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "experiment": self.experiment,
                "config_hash": self.config_hash,
                "version": self.version,
                "trials": len(self.rows),
                "aggregate": self.aggregate,
            },
            indent=1,
            sort_keys=True,
        )


def _points(cfg: dict) -> list[dict]:
    sweep = cfg.get("sweep") or {}
    keys = sorted(sweep)
    base = cfg.get("params") or {}
    return [{**base, **dict(zip(keys, combo))} for combo in itertools.product(*(sweep[k] for k in keys))]


def _seeds(cfg: dict) -> list[int]:
    if "seeds" in cfg:
        return list(cfg["seeds"])
    return list(range(cfg.get("trials", 1)))


def _job(args):
    experiment, params, seed = args
    return run_trial(experiment, params, seed)


def run_config(cfg: dict, threads: int = 1) -> RunRecord:
    validate_config(cfg)
    exp = cfg["experiment"]
    sweep_keys = sorted(cfg.get("sweep") or {})
    jobs = [(exp, p, s) for p in _points(cfg) for s in _seeds(cfg)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_job, jobs))  # map keeps input order
    else:
        results = [_job(j) for j in jobs]
    base_cols = COLUMNS[exp]
    extra = [k for k in sweep_keys if k not in base_cols]
    seed_col = [] if "seed" in base_cols else ["seed"]
    columns = tuple(extra + seed_col + list(base_cols))
    rows = []
    for (_, params, seed), got in zip(jobs, results):
        for r in got:
            row = {k: params.get(k, DEFAULTS[exp].get(k)) for k in extra}
            row.update({"seed": seed, **r})
            rows.append({c: row[c] for c in columns})
    rec = RunRecord(exp, config_hash(cfg), version_string(), columns, rows)
    rec.aggregate = aggregate(rows, extra + [c for c in base_cols if c not in METRICS[exp] and c not in ("seed", "offered_bw", "blocked_bw", "mc_ci95")], METRICS[exp])
    return rec


def aggregate(rows: list[dict], group_by, metrics) -> list[dict]:
    """Mean and 95% CI of each metric per group, groups in first-seen order."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault(tuple(str(r[k]) for k in group_by), []).append(r)
    out = []
    for key, members in groups.items():
        entry = dict(zip(group_by, key))
        entry["n"] = len(members)
        for m in metrics:
            mu, ci = mean_ci95([float(r[m]) for r in members])
            entry[m] = {"mean": mu, "ci95": ci}
        out.append(entry)
    return out

