import math
from fractions import Fraction

import numpy as np
import pytest

from mgon.net.rng import make_rng
from mgon.oxc import (
    NodeSpec,
    blocking_analytic,
    coloring_violations,
    cost_model,
    flex_assign,
    hier_k2_assign,
    hrfs_assign,
    hsa_assign,
    lemma_violations,
    random_demand,
    s_approx,
    s_exact,
    simulate_blocking,
)
from mgon.oxc.blocking import flex_blocking_enumerated, flex_blocking_exact, hier1_blocking_exact
from mgon.oxc.coloring import color_bipartite, is_proper

# demand of the six-input-fiber, two-link example node (rows: input fiber)
SMALL_NODE = NodeSpec(D=2, F=3, W=4)
SMALL_DEMAND = np.array([[3, 1], [2, 2], [1, 3], [3, 1], [0, 4], [3, 1]])


def _capacity_overflow(spec, q):
    return sum(max(0, int(q[:, d].sum()) - spec.capacity(d)) for d in range(spec.D))


def test_flex_fill_of_example_node():
    a = flex_assign(SMALL_NODE, SMALL_DEMAND)
    assert a.blocked == 0
    assert lemma_violations(a) == [] and coloring_violations(a) == []
    link0 = {s.input_fiber: set() for s in a.accepted if s.link == 0}
    for s in a.accepted:
        if s.link == 0:
            link0[s.input_fiber].add(s.output_fiber)
    assert link0 == {0: {0}, 1: {0, 1}, 2: {1}, 3: {1, 2}, 5: {2}}


def test_hrfs_and_hsa_on_example_node():
    # fibers 1 and 6 share the first output fiber, 2 and 4 the second, 3 the third
    sel = {(0, 0): 0, (5, 0): 0, (1, 0): 1, (3, 0): 1, (2, 0): 2}
    hrfs = hrfs_assign(SMALL_NODE, SMALL_DEMAND, selection=sel)
    hsa = hsa_assign(SMALL_NODE, SMALL_DEMAND)
    assert hrfs.blocked_per_link()[0] == 3
    assert hsa.blocked_per_link()[0] == 1
    assert coloring_violations(hrfs) == [] and coloring_violations(hsa) == []


def test_flex_meets_structure_on_random_nodes():
    rng = make_rng(1, "test-flex")
    for F in (1, 2, 3, (1, 2, 4)):
        spec = NodeSpec(D=3, F=F, W=5)
        for _ in range(200):
            q = random_demand(spec, rng, float(rng.random()))
            a = flex_assign(spec, q)
            assert lemma_violations(a) == []
            assert coloring_violations(a) == []
            assert a.blocked == _capacity_overflow(spec, q)


def test_hier_k2_equals_flex():
    spec = NodeSpec(D=4, F=3, W=4, arch="hier", k=2)
    rng = make_rng(2, "test-hier")
    for _ in range(200):
        q = random_demand(spec, rng, 0.8)
        assert hier_k2_assign(spec, q).blocked == flex_assign(spec, q).blocked
    with pytest.raises(ValueError):
        hier_k2_assign(NodeSpec(D=2, F=2, W=2, arch="hier", k=1), np.zeros((4, 2), dtype=int))


def test_zero_demand_never_blocks():
    spec = NodeSpec(D=3, F=2, W=4)
    q = np.zeros((6, 3), dtype=int)
    for f in (flex_assign, hsa_assign, hrfs_assign):
        a = f(spec, q)
        assert a.blocked == 0 and a.slots == []
    assert blocking_analytic(spec, 0.0) == 0.0


def test_bad_demand_rejected():
    spec = NodeSpec(D=2, F=1, W=2)
    with pytest.raises(ValueError):
        flex_assign(spec, np.array([[3, 0], [0, 0]]))
    with pytest.raises(ValueError):
        flex_assign(spec, np.zeros((3, 2), dtype=int))


def test_bipartite_coloring_proper():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        m = int(rng.integers(0, 40))
        edges = [(int(rng.integers(n)), int(rng.integers(n))) for _ in range(m)]
        colors = color_bipartite(edges, n, n)
        assert is_proper(edges, colors, n)
        deg = max((sum(1 for e in edges if e[0] == v) for v in range(n)), default=0)
        deg = max([deg] + [sum(1 for e in edges if e[1] == v) for v in range(n)])
        assert max(colors, default=-1) < max(deg, 1)


def test_flex_closed_form_matches_enumeration():
    spec = NodeSpec(D=2, F=1, W=2)
    for p in (Fraction(1, 4), Fraction(1, 2), Fraction(9, 10)):
        exact = flex_blocking_enumerated(spec, p)
        assert flex_blocking_exact(spec, p) == exact
        assert math.isclose(blocking_analytic(spec, float(p)), float(exact), rel_tol=1e-9)


def test_hier1_float_matches_rational():
    spec = NodeSpec(D=2, F=2, W=2, arch="hier", k=1)
    for p in (0.3, 0.7):
        assert math.isclose(blocking_analytic(spec, p), float(hier1_blocking_exact(spec, p)), rel_tol=1e-9)


def test_blocking_monotone_in_p():
    spec = NodeSpec(D=4, F=10, W=32)
    vals = [blocking_analytic(spec, p) for p in np.linspace(0.3, 1.0, 8)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        blocking_analytic(spec, 1.5)


def test_full_load_blocking_value():
    # every wavelength busy: flex blocks the multinomial overflow
    spec = NodeSpec(D=2, F=1, W=2)
    assert float(flex_blocking_exact(spec, 1)) == pytest.approx(blocking_analytic(spec, 1.0))


def test_flex_mc_agrees_with_analytic():
    spec = NodeSpec(D=3, F=2, W=4)
    mc = simulate_blocking(spec, 0.8, 4000, 5, "flex")
    assert abs(mc.mean - blocking_analytic(spec, 0.8)) <= mc.band()


def test_hier1_mc_agrees_on_full_size_node():
    # the HIER(1) form treats fiber load and node total as independent,
    # which only holds once N*W is large
    spec = NodeSpec(D=4, F=10, W=32, arch="hier", k=1)
    mc = simulate_blocking(spec, 0.6, 2000, 5, "hrfs")
    assert abs(mc.mean - blocking_analytic(spec, 0.6)) <= mc.band()


def test_s_exact_values():
    assert [s_exact(n) for n in (1, 4, 5, 16, 17, 64)] == [1, 1, 3, 5, 8, 21]
    assert s_approx(16) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        s_exact(0)


def test_cost_units():
    assert cost_model(NodeSpec(D=4, F=4, W=8))["wss_units"] == 160
    assert cost_model(NodeSpec(D=2, F=2, W=8))["wss_units"] == 8
    hier = cost_model(NodeSpec(D=4, F=4, W=8, arch="hier", k=2))
    assert hier["wss_units"] < 160 and hier["mems_ports"] > 0
