import random

import numpy as np
import pytest

from mgon.net import (
    ConflictingAllocation,
    OutOfRange,
    ParseError,
    SpectrumState,
    TrafficSpec,
    UnknownConnection,
    availability,
    generate_requests,
    load_topology,
    parse_topology,
    run_dynamic_sim,
    run_requests,
)
from mgon.net.policies import ShortestPathFirstFit
from mgon.net.rng import make_rng
from mgon.net.sim import check_conservation
from mgon.net.spectrum import range_mask, window_starts


def test_smallest_file():
    t = parse_topology("nodes 2\nslots 4\nlink 0 1 3\n")
    assert t.node_count == 2 and t.slots_per_fiber == 4
    assert len(t.links) == 2
    assert all(l.fibers == 3 for l in t.links)
    assert {(l.src, l.dst) for l in t.links} == {(0, 1), (1, 0)}


def test_nsf_has_44_directed_links():
    t = load_topology("nsf")
    assert t.node_count == 14
    assert len(t.links) == 44


def test_out_of_range_reports_line():
    with pytest.raises(OutOfRange) as e:
        parse_topology("nodes 5\nslots 4\nlink 0 99 1\n")
    assert e.value.line == 3


def test_parse_error_line():
    with pytest.raises(ParseError) as e:
        parse_topology("nodes 2\nslots x\n")
    assert e.value.line == 2


def test_zero_requests():
    assert generate_requests(TrafficSpec(), 0, seed=1, nodes=4) == []


def test_size_frequencies():
    spec = TrafficSpec(sizes=(3, 4, 7), probs=(0.2, 0.5, 0.3))
    reqs = generate_requests(spec, 10**6, seed=3, nodes=14)
    sizes = np.array([r.demand for r in reqs])
    for b, p in zip(spec.sizes, spec.probs):
        assert abs((sizes == b).mean() - p) < 0.002


def test_interarrival_mean():
    spec = TrafficSpec(rate=5.0)
    reqs = generate_requests(spec, 10**6, seed=4, nodes=6, dynamic=True)
    arr = np.array([r.arrival for r in reqs])
    mean = arr[-1] / len(arr)
    assert abs(mean - 0.2) / 0.2 < 0.01


def test_requests_deterministic():
    spec = TrafficSpec(sizes=(1, 2), probs=(0.5, 0.5), rate=3)
    a = generate_requests(spec, 200, seed=9, nodes=5, dynamic=True)
    b = generate_requests(spec, 200, seed=9, nodes=5, dynamic=True)
    assert a == b
    assert all(r.source != r.destination for r in a)
    assert generate_requests(spec, 5, seed=9, nodes=5)[0].arrival is None


def _five_fibers():
    return parse_topology("nodes 2\nslots 8\nlink 0 1 5\n")


def test_availability_counts():
    t = _five_fibers()
    st = SpectrumState(t)
    link = t.link_id(0, 1)
    assert availability(st, link, (2, 4)) == 5
    fibers = list(t.links[link].fiber_ids)
    st.allocate("a", [(fibers[0], 2, 4), (fibers[3], 3, 5)])
    assert availability(st, link, (2, 4)) == 3
    st.allocate("b", [(f, 0, 8) for f in fibers if f not in (fibers[0], fibers[3])] + [(fibers[0], 0, 2), (fibers[3], 0, 3)])
    assert availability(st, link, (2, 4)) == 0
    with pytest.raises(ValueError):
        st.availability(link, 6, 9)


def test_allocate_release_round_trip():
    t = _five_fibers()
    st = SpectrumState(t)
    st.allocate("x", [(1, 0, 3)])
    before = list(st.occupancy)
    st.allocate("y", [(1, 3, 5), (2, 0, 8)])
    st.release("y")
    assert st.occupancy == before
    with pytest.raises(ConflictingAllocation):
        st.allocate("z", [(1, 2, 4)])
    with pytest.raises(UnknownConnection):
        st.release("nope")


def test_random_allocations_match_replay():
    t = load_topology("ring20")
    st = SpectrumState(t)
    rng = random.Random(5)
    naive = {}  # (fiber, slot) -> connection
    live = []
    S = t.slots_per_fiber
    for cid in range(1000):
        if live and rng.random() < 0.45:
            c = live.pop(rng.randrange(len(live)))
            st.release(c)
            for k in [k for k, v in naive.items() if v == c]:
                del naive[k]
            continue
        f = rng.randrange(t.fiber_count)
        a = rng.randrange(S)
        b = rng.randint(a + 1, min(S, a + 4))
        if any((f, s) in naive for s in range(a, b)):
            with pytest.raises(ConflictingAllocation):
                st.allocate(cid, [(f, a, b)])
            continue
        st.allocate(cid, [(f, a, b)])
        live.append(cid)
        for s in range(a, b):
            naive[(f, s)] = cid
    for f in range(t.fiber_count):
        expect = sum(1 << s for (g, s) in naive if g == f)
        assert st.occupancy[f] == expect
    check_conservation(st)


def test_availability_matches_bitmap_scan():
    t = load_topology("nsf_f5_10")
    st = SpectrumState(t)
    rng = make_rng(2, "avail")
    for cid in range(400):
        f = int(rng.integers(t.fiber_count))
        a = int(rng.integers(t.slots_per_fiber - 3))
        if st.is_free(f, a, a + 3):
            st.allocate(cid, [(f, a, a + 3)])
    for _ in range(300):
        l = int(rng.integers(len(t.links)))
        a = int(rng.integers(t.slots_per_fiber - 2))
        b = a + 2
        brute = sum(all(not (st.occupancy[f] >> s) & 1 for s in range(a, b)) for f in t.links[l].fiber_ids)
        assert st.availability(l, a, b) == brute


def test_window_starts():
    occ = 0b0011_0000
    assert window_starts(occ, 2, 8) == range_mask(0, 3) | range_mask(6, 7)
    assert window_starts(0, 9, 8) == 0


def test_single_request_never_blocks():
    t = load_topology("ring20")
    spec = TrafficSpec(rate=1e-4)
    m = run_dynamic_sim(t, spec, ShortestPathFirstFit(t), 200, 10, seed=1)
    assert m.demand_blocking_ratio == 0


def test_simulation_deterministic_and_releases_everything():
    t = load_topology("ring20")
    spec = TrafficSpec(sizes=(1, 2), probs=(0.5, 0.5), rate=30)
    reqs = generate_requests(spec, 3000, seed=2, nodes=t, dynamic=True)
    st = SpectrumState(t)
    m1 = run_requests(t, reqs, ShortestPathFirstFit(t), warmup=100, state=st, check_every=50)
    m2 = run_requests(t, reqs, ShortestPathFirstFit(t), warmup=100)
    assert m1.summary() | {"wall_seconds": 0} == m2.summary() | {"wall_seconds": 0}
    assert m1.msu == m2.msu
    assert st.used_bits() == 0 and not st.connections


def test_blocking_monotone_in_load():
    t = load_topology("ring20")
    loads = [60, 80, 100, 120, 140]
    curve = []
    for lam in loads:
        vals = []
        for seed in range(10):
            spec = TrafficSpec(sizes=(1, 2), probs=(0.5, 0.5), rate=lam)
            vals.append(run_dynamic_sim(t, spec, ShortestPathFirstFit(t), 2000, 200, seed).demand_blocking_ratio)
        curve.append(np.mean(vals))
    assert all(a < b for a, b in zip(curve, curve[1:])), curve


def test_csv_row_format():
    t = load_topology("ring20")
    m = run_dynamic_sim(t, TrafficSpec(rate=10), ShortestPathFirstFit(t), 50, 0, seed=0)
    row = m.csv_row("ff", 0, 10)
    assert len(row.split(",")) == 7
