import itertools
import warnings
from fractions import Fraction as Fr

import numpy as np
import pytest

from mgon.dynrsa import (
    ConflictGraph,
    DynRsaPolicy,
    PartitionPlan,
    PartitionTooSmall,
    PathTable,
    Segment,
    brute_force_losses,
    cached_path_table,
    capacity_losses,
    equal_segments,
    make_policy,
    min_hop_candidates,
    objective_of,
    plan_partitions,
    route_loads,
    solve_path_lp,
)
from mgon.net import Request, SpectrumState, TrafficSpec, generate_requests, load_topology, run_requests
from mgon.net.sim import check_conservation
from mgon.net.spectrum import Assignment


def test_partition_example():
    plan = plan_partitions(352, (3, 4, 7), (0.2, 0.5, 0.3))
    assert plan.lengths == (45, 152, 154)
    assert plan.bin_counts == (15, 38, 22)
    assert plan.unassigned == 1
    starts = [s.start for s in plan.segments]
    assert starts == [0, 45, 197]


def test_partition_edge_cases():
    one = plan_partitions(12, (4,), (1.0,))
    assert one.lengths == (12,) and one.unassigned == 0
    with pytest.raises(ValueError):
        plan_partitions(5, (3, 4), (0.5, 0.5))
    with pytest.raises(ValueError):
        plan_partitions(100, (3, 4), (0.5, 0.4))
    with warnings.catch_warnings(record=True) as got:
        warnings.simplefilter("always")
        plan_partitions(12, (1, 8), (0.999, 0.001))
    assert any(issubclass(w.category, PartitionTooSmall) for w in got)


@pytest.mark.filterwarnings("ignore::mgon.dynrsa.PartitionTooSmall")
def test_partition_never_overflows():
    rng = np.random.default_rng(0)
    for _ in range(300):
        sizes = tuple(sorted(rng.choice(np.arange(1, 12), size=3, replace=False).tolist()))
        p = rng.dirichlet(np.ones(3))
        S = int(rng.integers(sum(sizes), 400))
        plan = plan_partitions(S, sizes, p.tolist())
        assert sum(plan.lengths) <= S
        assert all(seg.length % seg.size == 0 for seg in plan.segments)


def test_equal_segments():
    plan = equal_segments(10, (1, 2, 3))
    assert plan.lengths == (3, 3, 4)


def _lp5_table():
    t = load_topology("lp5")
    c = min_hop_candidates(t)
    probs = {r: [Fr(1)] * len(v) for r, v in c.items()}
    probs[(0, 3)] = [Fr(1, 3), Fr(2, 3)]
    probs[(0, 4)] = [Fr(1), Fr(0)]
    probs[(1, 2)] = [Fr(1), Fr(0), Fr(0)]
    probs[(3, 4)] = [Fr(2, 3), Fr(1, 3)]
    return t, c, PathTable(c, probs)


def test_lp_matches_reference_vector():
    t, c, ref = _lp5_table()
    ref.check()
    got = solve_path_lp(t, c)
    loads = route_loads(t)
    assert abs(got.objective - objective_of(t, ref, loads)) < 1e-9
    assert abs(objective_of(t, got, loads) - got.objective) < 1e-9
    got.check()


def test_lp_beats_single_path():
    t = load_topology("nsf")
    c = min_hop_candidates(t)
    lp = solve_path_lp(t, c)
    single = PathTable({r: ps[:1] for r, ps in c.items()}, {r: [1.0] for r in c})
    assert lp.objective <= objective_of(t, single, route_loads(t)) + 1e-9


def test_path_table_round_trip(tmp_path):
    t = load_topology("lp5")
    a = cached_path_table(t, None, tmp_path)
    b = cached_path_table(t, None, tmp_path)
    assert a.candidates == b.candidates
    assert np.allclose([float(x) for r in sorted(a.probs) for x in a.probs[r]], [float(x) for r in sorted(b.probs) for x in b.probs[r]])
    assert len(list(tmp_path.iterdir())) == 1


def _lp5_bins_state():
    t, _, tab = _lp5_table()
    t = t.with_slots(4)
    plan = PartitionPlan(4, (Segment(1, 0, 4),))
    pol = DynRsaPolicy(t, "nsa", tab, "mps", plan, seed=0)
    st = SpectrumState(t)
    caps = {(0, 1): (4, 3, 2, 1), (1, 4): (3, 2, 3, 2), (4, 2): (2, 1, 2, 2), (3, 1): (2, 3, 2, 3)}
    n = 0
    for (u, v), cs in caps.items():
        link = t.link(u, v)
        for x, cx in enumerate(cs):
            for f in list(link.fiber_ids)[: link.fibers - cx]:
                a = Assignment(((f, x, x + 1),))
                st.allocate(("pre", n), a.segments)
                pol.on_commit(None, a, st)
                n += 1
    return t, pol, st


def test_capacity_losses_and_choice():
    t, pol, st = _lp5_bins_state()
    assert (pol.bins.cap == pol.bins.from_scratch(st)).all()
    g = pol.graph
    k = g.path_id((1, 4))
    losses = capacity_losses(g, k, pol.bins.cap, [0, 1, 2, 3], exact=True)
    assert losses == [Fr(1), Fr(5, 3), 0, Fr(2, 3)]
    assert brute_force_losses(g, k, pol.bins.cap, [0, 1, 2, 3]) == losses
    a = pol.admit(Request(0, 1, 4, 1), st)
    assert [(s, e) for _, s, e in a.segments] == [(2, 3)]  # third bin


def test_conflict_graph_symmetric():
    t = load_topology("nsf")
    g = ConflictGraph(t, solve_path_lp(t, min_hop_candidates(t)))
    assert g.is_symmetric()
    for k in range(0, len(g.paths), 7):
        mine = set(g.paths[k].links)
        for j in g.adj[k]:
            assert mine & set(g.paths[j].links)
        assert k not in g.adj[k]


def test_losses_match_brute_force_random_states():
    t = load_topology("lp5")
    tab = solve_path_lp(t, min_hop_candidates(t))
    g = ConflictGraph(t, tab)
    rng = np.random.default_rng(5)
    L = len(t.links)
    for _ in range(50):
        cap = np.vstack([rng.integers(0, 4, size=(L, 6)), np.full((1, 6), 10**9)])
        k = int(rng.integers(len(g.paths)))
        fast = capacity_losses(g, k, cap, list(range(6)))
        slow = brute_force_losses(g, k, cap, list(range(6)))
        assert np.allclose([float(x) for x in fast], [float(x) for x in slow])


@pytest.mark.parametrize("sa,routing", list(itertools.product(["ff", "r", "flf", "pd-ff", "mk", "nsa", "nsa-shared"], ["ssp", "mps"])))
def test_policies_run_clean(sa, routing):
    t = load_topology("nsf_f5_10").with_slots(64)
    spec = TrafficSpec(sizes=(3, 4, 7), probs=(0.2, 0.5, 0.3), rate=600)
    tab = solve_path_lp(t, min_hop_candidates(t)) if routing == "mps" else None
    pol = make_policy(t, sa, routing, spec, tab, seed=3)
    reqs = generate_requests(spec, 1500, 3, t, dynamic=True)
    st = SpectrumState(t)
    m = run_requests(t, reqs, pol, warmup=100, state=st, check_every=100)
    check_conservation(st)
    assert 0.0 <= m.demand_blocking_ratio <= 1.0
    if pol.bins is not None:
        assert (pol.bins.cap == pol.bins.from_scratch(st)).all()


def test_nsa_keeps_bins_in_step():
    t = load_topology("nsf_f5_10").with_slots(64)
    spec = TrafficSpec(sizes=(3, 4, 7), probs=(0.2, 0.5, 0.3), rate=900)
    pol = make_policy(t, "nsa-shared", "mps", spec, solve_path_lp(t, min_hop_candidates(t)), seed=1)
    st = SpectrumState(t)
    rng = np.random.default_rng(1)
    live = []
    for r in generate_requests(spec, 600, 1, t):
        if live and rng.random() < 0.3:
            rid, a = live.pop(int(rng.integers(len(live))))
            st.release(rid)
            pol.on_release(None, a, st)
        a = pol.admit(r, st)
        if a is not None:
            st.allocate(r.id, a.segments, a.bands)
            pol.on_commit(r, a, st)
            live.append((r.id, a))
    assert len(live) > 50
    assert (pol.bins.cap == pol.bins.from_scratch(st)).all()
    assert pol.bins.flags == {k: v for k, v in pol.bins.flags_from_scratch(st).items() if v}


def test_policy_argument_checks():
    t, _, tab = _lp5_table()
    with pytest.raises(ValueError):
        DynRsaPolicy(t, "best", tab)
    with pytest.raises(ValueError):
        DynRsaPolicy(t, "nsa", tab)
    with pytest.raises(ValueError):
        make_policy(t, "ff", "mps", TrafficSpec())


def test_mps_follows_probabilities():
    t, _, tab = _lp5_table()
    pol = DynRsaPolicy(t, "ff", tab, "mps", seed=2)
    paths = [pol.choose_path(0, 3)[0] for _ in range(30000)]
    cands = tab.candidates[(0, 3)]
    share = paths.count(cands[0]) / len(paths)
    assert abs(share - 1 / 3) < 0.015
    assert all(pol.choose_path(0, 4)[0] == tab.candidates[(0, 4)][0] for _ in range(200))
