import dataclasses
import math

import pytest

from mgon.net import Request, SpectrumState, TrafficSpec, generate_requests, load_topology, parse_topology
from mgon.rfbsa import (
    Banding,
    CostParams,
    OracleTooLarge,
    exhaustive_min_msu,
    path_cost,
    rfbsa_route,
    run_static,
    spectrum_cost,
    switching_cost,
    validate,
)


def _worked_example_state():
    t = load_topology("layered4")

    def P(u, v, i):  # 1-based node ids and fiber number, as in the figure
        return t.link(u - 1, v - 1).fiber_ids[i - 1]

    st = SpectrumState(t)
    st.allocate("A", [(P(1, 2, 1), 2, 3), (P(2, 3, 1), 2, 3)], [(1, P(1, 2, 1), P(2, 3, 1))])
    st.allocate("B", [(P(1, 2, 1), 3, 4), (P(2, 4, 1), 3, 4)], [(1, P(1, 2, 1), P(2, 4, 1))])
    st.allocate("C", [(P(1, 2, 2), 2, 3), (P(2, 3, 2), 2, 3)], [(1, P(1, 2, 2), P(2, 3, 2))])
    st.allocate("D", [(P(2, 3, 1), 0, 2)])
    st.allocate("E", [(P(2, 4, 1), 0, 2)])
    st.allocate("F", [(P(2, 3, 2), 0, 2)])
    return t, st, P


def test_worked_example_winner():
    t, st, P = _worked_example_state()
    prm, band = CostParams(alpha=0.1, beta=1), Banding.all_flex(t, 2)
    res = rfbsa_route(Request(0, 0, 2, 2), st, prm, band, prune=False)
    lp = res.lightpath
    assert lp.nodes == (0, 1, 3, 2)
    assert list(lp.fibers) == [P(1, 2, 2), P(2, 4, 2), P(4, 3, 1)]
    assert path_cost(st, lp.fibers, lp.start, 2, prm, band) == lp.cost
    others = sorted(c.cost for c in res.candidates if c.fibers != lp.fibers)
    assert others == [12.0]
    # the shorter route from the second source fiber, forced onto the direct path
    rejected = path_cost(st, [P(1, 2, 2), P(2, 3, 2)], 3, 2, prm, band)
    assert rejected == 10.0
    direct = rfbsa_route(Request(0, 0, 2, 2), st, prm, band, paths=[(0, 1, 2)], prune=False)
    assert sorted(c.cost for c in direct.candidates) == [10.0, 12.0]


def test_pruning_keeps_winner():
    t, st, _ = _worked_example_state()
    prm, band = CostParams(alpha=0.1, beta=1), Banding.all_flex(t, 2)
    a = rfbsa_route(Request(0, 0, 2, 2), st, prm, band, prune=False).lightpath
    b = rfbsa_route(Request(0, 0, 2, 2), st, prm, band, prune=True).lightpath
    assert a == b


def test_cost_rules():
    t = parse_topology("nodes 3\nslots 8\nlink 0 1 2\nlink 1 2 2\n")
    st = SpectrumState(t)
    f = t.link(0, 1).fiber_ids[0]
    st.allocate("x", [(f, 0, 3)])
    p = CostParams()
    assert spectrum_cost(st, f, 0, 1, p) == math.inf
    assert spectrum_cost(st, f, 3, 2, p) == 5.0  # window end beyond the current MSU
    g = t.link(0, 1).fiber_ids[1]
    assert spectrum_cost(st, g, 0, 2, p) == 2.0  # empty fiber: MSU 0, window end 2
    assert switching_cost(st, 1, f, t.link(1, 2).fiber_ids[0], p, Banding.conv()) == 0.0
    with pytest.raises(ValueError):
        CostParams(alpha=-1)


def test_conv_runs_validate_and_audit():
    t = load_topology("nsf_f5_10")
    reqs = generate_requests(TrafficSpec(), 60, 4, t)
    for alg in ("rfbsa", "spff", "kspff", "spfbsa"):
        for band in (Banding.conv(), Banding.all_flex(t, 4)):
            run = run_static(t, reqs, alg, band, audit=True)
            assert not run.blocked and not run.audit_failures
            assert validate(t, run.lightpaths, band, {r.id: r for r in reqs}, run.state.capacity) == []


def test_validator_catches_mutations():
    t = load_topology("nsf_f5_10")
    reqs = generate_requests(TrafficSpec(), 30, 2, t)
    run = run_static(t, reqs, "rfbsa", Banding.all_flex(t, 4))
    lps = list(run.lightpaths)
    multi = next(i for i, lp in enumerate(lps) if len(lp.fibers) > 1)
    bad_width = dataclasses.replace(lps[multi], stop=lps[multi].stop + 1)
    bad_chain = dataclasses.replace(lps[multi], fibers=tuple(reversed(lps[multi].fibers)))
    by_id = {r.id: r for r in reqs}
    for mutant in (bad_width, bad_chain):
        assert validate(t, lps[:multi] + [mutant] + lps[multi + 1 :], Banding.all_flex(t, 4), by_id)
    dup = lps + [lps[0]]
    assert any("overlaps" in p for p in validate(t, dup, Banding.all_flex(t, 4)))
    assert validate(t, lps, Banding.all_flex(t, 0.5))  # band limit below 1


def test_band_limit_respected_at_b1():
    t = load_topology("nsf_f5_10")
    reqs = generate_requests(TrafficSpec(), 120, 7, t)
    band = Banding.all_flex(t, 1)
    run = run_static(t, reqs, "rfbsa", band)
    assert validate(t, run.lightpaths, band) == []
    for (v, fin) in {(b[0], b[1]) for lp in run.lightpaths for b in lp.bands}:
        assert run.state.band_count(v, fin) <= 1


def test_never_worse_than_spff_on_single_requests():
    t = load_topology("nsf_f5_10")
    for r in generate_requests(TrafficSpec(), 40, 9, t):
        a = run_static(t, [r], "rfbsa", Banding.conv(), CostParams(alpha=0, beta=1))
        b = run_static(t, [r], "spff", Banding.conv())
        assert a.msu_max <= b.msu_max


def _tiny():
    return parse_topology("nodes 4\nslots 16\nlink 0 1 2\nlink 1 2 1\nlink 0 3 1\nlink 3 2 1\nlink 1 3 1\n")


def test_oracle_bounds_heuristics():
    t = _tiny()
    band = Banding.all_flex(t, 2)
    for seed in range(8):
        reqs = generate_requests(TrafficSpec(sizes=(1, 2, 3), probs=(0.4, 0.4, 0.2)), 5, seed, t)
        opt = exhaustive_min_msu(t, reqs, band)
        for alg in ("rfbsa", "spff"):
            assert opt <= run_static(t, reqs, alg, band).msu_max
        assert opt >= max(r.demand for r in reqs)


def test_oracle_limits():
    t = _tiny()
    with pytest.raises(OracleTooLarge):
        exhaustive_min_msu(t, generate_requests(TrafficSpec(), 9, 0, t), Banding.conv())


def test_empty_batch():
    t = _tiny()
    run = run_static(t, [], "rfbsa")
    assert run.msu_max == 0 and run.lightpaths == []


def test_too_wide_request_blocks():
    t = _tiny()
    st = SpectrumState(t, 2)
    assert rfbsa_route(Request(0, 0, 2, 3), st).blocked
