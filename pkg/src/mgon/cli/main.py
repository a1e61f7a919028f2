"""``mgon`` command line: one subcommand per experiment plus ``run CONFIG``."""

from __future__ import annotations

import csv
import io
import logging
import os
import sys
from pathlib import Path

import click

from mgon.cli.config import ConfigError, load_config, run_config
from mgon.cli.experiments import COLUMNS, topology_exists

log = logging.getLogger("mgon")


def _setup_logging() -> None:
    level = os.environ.get("MGON_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _seeds_for(ctx, seed, trials) -> list[int]:
    base = seed if seed is not None else ctx.obj["seed"]
    return list(range(base, base + trials))


def _run_direct(ctx, experiment: str, params: dict, seed, trials, out) -> None:
    topo = params.get("topology")
    if topo is not None and not topology_exists(topo):
        raise click.UsageError(f"topology file not found: {topo}")
    cfg = {"schema_version": 1, "experiment": experiment, "params": params, "seeds": _seeds_for(ctx, seed, trials)}
    rec = _run(cfg, ctx.obj["threads"])
    cols = COLUMNS[experiment]
    # multi-trial runs need the seed to tell rows apart
    if len(cfg["seeds"]) > 1 and "seed" not in cols:
        cols = ("seed",) + cols
    target = out or ctx.obj["out"]
    if target and Path(target).suffix.lower() != ".csv":
        target = str(Path(target) / f"{experiment}.csv")
    _emit(csv_text(cols, [{c: r[c] for c in cols} for r in rec.rows]), target)


def _run(cfg, threads):
    try:
        return run_config(cfg, threads)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    except (ValueError, RuntimeError, KeyError) as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


common = [
    click.option("--seed", type=int, default=None, help="Seed of the first trial (defaults to the global --seed)."),
    click.option("--trials", type=int, default=1, show_default=True, help="Number of consecutive seeds."),
    click.option("--out", type=click.Path(dir_okay=True), default=None, help="CSV file (stdout if omitted)."),
]


def with_common(f):
    for opt in reversed(common):
        f = opt(f)
    return f


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True, help="Worker processes for trials.")
@click.option("--out", type=click.Path(), default=None, help="Default output file or directory.")
@click.pass_context
def cli(ctx, seed, threads, out):
    """Resource allocation experiments for multi-granular optical networks."""
    _setup_logging()
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, threads=max(1, threads), out=out)


@cli.command()
@click.option("--topology", default="nsf", show_default=True)
@click.option("--requests", type=int, default=50, show_default=True)
@click.option("--strategy", type=click.Choice(["nn", "rdc", "st", "oracle"]), default="rdc", show_default=True)
@with_common
@click.pass_context
def waveband(ctx, topology, requests, strategy, seed, trials, out):
    """Band minimisation of a First-Fit routed demand set."""
    _run_direct(ctx, "waveband", {"topology": topology, "requests": requests, "strategy": strategy}, seed, trials, out)


@cli.command()
@click.option("--arch", type=click.Choice(["conv", "hier"]), default="conv", show_default=True)
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--d", type=int, default=4, show_default=True)
@click.option("--f", type=int, default=10, show_default=True)
@click.option("--w", type=int, default=32, show_default=True)
@click.option("--p", "p", default="0.1", show_default=True, help="Comma-separated wavelength occupancy probabilities.")
@click.option("--mc-trials", type=int, default=10000, show_default=True, help="Monte-Carlo trials per point.")
@with_common
@click.pass_context
def oxc(ctx, arch, k, d, f, w, p, mc_trials, seed, trials, out):
    """Analytic vs Monte-Carlo node blocking."""
    params = {"arch": arch, "k": k, "d": d, "f": f, "w": w, "p": _floats(p), "trials": mc_trials}
    _run_direct(ctx, "oxc", params, seed, trials, out)


@cli.command()
@click.option("--topology", default="nsf_f5_10", show_default=True)
@click.option("--arch", type=click.Choice(["conv", "flex"]), default="conv", show_default=True)
@click.option("--b", type=int, default=4, show_default=True)
@click.option("--alg", type=click.Choice(["rfbsa", "spff", "kspff", "spfbsa"]), default="rfbsa", show_default=True)
@click.option("--k", type=int, default=None, help="Candidate paths (RFBSA searches the whole graph if omitted).")
@click.option("--requests", type=int, default=500, show_default=True)
@click.option("--sizes", default="3,4,7", show_default=True)
@click.option("--probs", default="0.2,0.5,0.3", show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@with_common
@click.pass_context
def rfbsa(ctx, topology, arch, b, alg, k, requests, sizes, probs, alpha, beta, seed, trials, out):
    """Static routing, fiber, band and spectrum assignment."""
    params = {
        "topology": topology,
        "arch": arch,
        "b": b,
        "alg": alg,
        "k": k,
        "requests": requests,
        "sizes": _ints(sizes),
        "probs": _floats(probs),
        "alpha": alpha,
        "beta": beta,
    }
    _run_direct(ctx, "rfbsa", params, seed, trials, out)


@cli.command()
@click.option("--topology", default="place5", show_default=True)
@click.option("--budget", type=int, default=89, show_default=True)
@click.option("--scheme", type=click.Choice(["rp", "tap", "best"]), default="tap", show_default=True)
@click.option("--b", type=int, default=4, show_default=True)
@click.option("--requests", type=int, default=100, show_default=True)
@click.option("--sizes", default="3,4,7", show_default=True)
@click.option("--probs", default="0.2,0.5,0.3", show_default=True)
@click.option("--mode", type=click.Choice(["static", "dynamic"]), default="static", show_default=True)
@click.option("--load", type=float, default=100.0, show_default=True, help="Erlangs (dynamic mode).")
@click.option("--warmup", type=int, default=1000, show_default=True)
@with_common
@click.pass_context
def placement(ctx, topology, budget, scheme, b, requests, sizes, probs, mode, load, warmup, seed, trials, out):
    """FLEX node placement under a WSS budget."""
    params = {
        "topology": topology,
        "budget": budget,
        "scheme": scheme,
        "b": b,
        "requests": requests,
        "sizes": _ints(sizes),
        "probs": _floats(probs),
        "mode": mode,
        "load": load,
        "warmup": warmup,
    }
    _run_direct(ctx, "placement", params, seed, trials, out)


@cli.command("dyn-rsa")
@click.option("--topology", default="nsf_f5_10", show_default=True)
@click.option("--slots", type=int, default=352, show_default=True)
@click.option("--policy", type=click.Choice(["nsa", "nsa-shared", "r", "ff", "flf", "mk", "pd-ff"]), default="ff", show_default=True)
@click.option("--routing", type=click.Choice(["mps", "ssp"]), default="ssp", show_default=True)
@click.option("--load", type=float, default=6800.0, show_default=True, help="Erlangs (arrival rate, unit holding).")
@click.option("--requests", type=int, default=100000, show_default=True)
@click.option("--warmup", type=int, default=10000, show_default=True)
@click.option("--sizes", default="3,4,7", show_default=True)
@click.option("--probs", default="0.2,0.5,0.3", show_default=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None, help="Keep solved path tables here.")
@with_common
@click.pass_context
def dyn_rsa(ctx, topology, slots, policy, routing, load, requests, warmup, sizes, probs, cache_dir, seed, trials, out):
    """Dynamic RSA with partitioning and next-state-aware bins."""
    params = {
        "topology": topology,
        "slots": slots,
        "policy": policy,
        "routing": routing,
        "load": load,
        "requests": requests,
        "warmup": warmup,
        "sizes": _ints(sizes),
        "probs": _floats(probs),
        "cache_dir": cache_dir,
    }
    _run_direct(ctx, "dyn-rsa", params, seed, trials, out)


@cli.command()
@click.option("--topology", default="cs5", show_default=True)
@click.option("--slots", type=int, default=None, help="Subcarriers per fiber (topology value if omitted).")
@click.option("--jobs", type=int, default=5, show_default=True)
@click.option("--mode", type=click.Choice(["static", "dynamic"]), default="static", show_default=True)
@click.option("--alg", type=click.Choice(["ff", "ca"]), default="ca", show_default=True)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
@click.option("--preset", type=click.Choice(["small", "nsf"]), default="small", show_default=True)
@click.option("--guard", type=int, default=2, show_default=True)
@click.option("--p-new", type=float, default=0.5, show_default=True, help="Arrival probability per slot (dynamic).")
@click.option("--job-file", type=click.Path(exists=True, dir_okay=False), default=None)
@with_common
@click.pass_context
def cosched(ctx, topology, slots, jobs, mode, alg, alpha, beta, preset, guard, p_new, job_file, seed, trials, out):
    """Co-schedule VMs and subcarrier bands for DAG jobs."""
    params = {
        "topology": topology,
        "slots": slots,
        "jobs": jobs,
        "mode": mode,
        "alg": alg,
        "alpha": alpha,
        "beta": beta,
        "preset": preset,
        "guard": guard,
        "p_new": p_new,
        "job_file": job_file,
    }
    _run_direct(ctx, "cosched", params, seed, trials, out)


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory (overrides the config).")
@click.pass_context
def run(ctx, config, out):
    """Run an experiment config: trial CSV plus JSON aggregate."""
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    rec = _run(cfg, ctx.obj["threads"])
    target = Path(out or cfg.get("out") or ctx.obj["out"] or "results") / Path(config).stem
    target.mkdir(parents=True, exist_ok=True)
    (target / "trials.csv").write_text(csv_text(rec.columns, rec.rows), encoding="utf-8")
    (target / "summary.json").write_text(rec.to_json() + "\n", encoding="utf-8")
    click.echo(f"{len(rec.rows)} rows -> {target}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="mgon", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
