
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyccov import corpus
from cyccov.flows import LogQ, add_cycle_flow, check_flow, q_le, zero_flow
from cyccov.graphcore import GraphError, Multigraph, find_bridges, is_even_subgraph, weight
from cyccov.matching import enumerate_perfect_matchings
from cyccov.reduce import (
    RefinementInapplicable,
    SplitGraph,
    contract_short_threads,
    lift_even_subgraph,
    lift_flow,
    project_flow,
    split_to_subcubic,
    split_vertex,
    strip_loops,
    suppress_threads,
)


def check_split_invariants(split: SplitGraph, strict_zero_free: bool):
    H = split.H
    assert all(len(H.incidence[v]) <= 3 for v in H.vertices)
    assert not find_bridges(H)
    if strict_zero_free:
        assert not find_bridges(H.without_edges(split.zero_edges))
    for ze in split.zero_edges:
        e = H.edges[ze]
        assert e.weight == 0
        assert len(H.incidence[e.u]) == 3 and len(H.incidence[e.v]) == 3
        assert split.origin_vertex[e.u] == split.origin_vertex[e.v]
    assert H.m == split.G.m + len(split.splits)
    # weight-1 edges of H are exactly the edges of G
    assert {e for e in H.edges if e not in split.zero_edges} == set(split.G.edges)


# ---------------------------------------------------------------- loops


def test_strip_loops_examples():
    G = Multigraph.from_pairs([(0, 0), (0, 0)])
    core, loops = strip_loops(G)
    assert core.m == 0 and core.n == 1 and loops == [0, 1]
    G = Multigraph.from_pairs([(0, 1), (1, 2), (2, 0), (0, 0)])
    core, loops = strip_loops(G)
    assert core.m == 3 and loops == [3]


# ---------------------------------------------------------------- splitting


def test_split_vertex_degree4():
    G = corpus.from_networkx(__import__("networkx").wheel_graph(5))
    hub = max(G.vertices, key=lambda v: len(G.incidence[v]))
    inc = G.incidence[hub]
    H = split_vertex(G, hub, inc[:2])
    new = max(H.vertices)
    assert len(H.incidence[hub]) == 3 and len(H.incidence[new]) == 3
    assert H.m == G.m + 1


def test_split_vertex_degree5_needs_more():
    G = corpus.complete(6)
    H = split_vertex(G, 0, G.incidence[0][:2])
    assert len(H.incidence[0]) == 4


def test_split_vertex_errors(k4):
    with pytest.raises(GraphError):
        split_vertex(k4, 0, k4.incidence[0][:2])
    K5 = corpus.complete(5)
    with pytest.raises(GraphError):
        split_vertex(K5, 0, (K5.incidence[0][0], K5.incidence[0][0]))
    with pytest.raises(GraphError):
        split_vertex(K5, 0, (K5.incidence[0][0], 999))


def test_split_parallel_pair():
    # two parallel edges at a degree-4 vertex
    G = Multigraph.from_pairs([(0, 1), (0, 1), (0, 2), (0, 2), (1, 2)])
    H = split_vertex(G, 0, (0, 1))
    assert not find_bridges(H)


def test_split_to_subcubic_cubic_is_identity(petersen):
    s = split_to_subcubic(petersen)
    assert s.H is petersen and not s.zero_edges and not s.splits


def test_split_to_subcubic_k5():
    s = split_to_subcubic(corpus.complete(5))
    assert len(s.splits) == 5 and len(s.zero_edges) == 5 and s.H.m == 15
    assert all(len(s.H.incidence[v]) == 3 for v in s.H.vertices)
    check_split_invariants(s, strict_zero_free=True)


def test_split_to_subcubic_w4():
    import networkx as nx
    s = split_to_subcubic(corpus.from_networkx(nx.wheel_graph(5)))
    assert len(s.splits) == 1
    check_split_invariants(s, strict_zero_free=True)


def test_split_odd_degree_keeps_h_bridgeless():
    # degree-5 vertices: zero-free bridgelessness is impossible there (see ledger),
    # but H itself must stay bridgeless
    s = split_to_subcubic(corpus.complete(6))
    check_split_invariants(s, strict_zero_free=False)


def test_split_requires_bridgeless_loopless():
    with pytest.raises(GraphError):
        split_to_subcubic(Multigraph.from_pairs([(0, 1), (1, 2)]))
    with pytest.raises(GraphError):
        split_to_subcubic(Multigraph.from_pairs([(0, 1), (0, 1), (1, 1)]))


@pytest.mark.parametrize("name,G", corpus.bridgeless_simple_graphs(6)[::3])
def test_split_invariants_atlas(name, G):
    core, _ = strip_loops(G)
    s = split_to_subcubic(core)
    even_high = all(len(G.incidence[v]) % 2 == 0 for v in G.vertices if len(G.incidence[v]) >= 4)
    check_split_invariants(s, strict_zero_free=even_high)


# ---------------------------------------------------------------- suppression


def test_suppress_cubic(petersen):
    sp = suppress_threads(petersen)
    assert sp.Hbar.m == 15 and set(sp.lifted_weight.values()) == {1}


def test_suppress_theta():
    sp = suppress_threads(corpus.theta(1, 2, 3))
    assert sp.Hbar.n == 2 and sp.Hbar.m == 3
    assert sorted(sp.lifted_weight.values()) == [1, 2, 3]
    assert sum(sp.lifted_weight.values()) == 6


def test_suppress_subdivided_k4(k4):
    G = corpus.subdivide(k4, {e: 1 for e in k4.edges})
    sp = suppress_threads(G)
    assert sp.Hbar.n == 4 and set(sp.lifted_weight.values()) == {2}
    assert set(sp.lifted_d1.values()) == {1}


def test_suppress_errors():
    with pytest.raises(GraphError):
        suppress_threads(corpus.complete(5))


def test_suppress_zero_edges_have_zero_weight():
    s = split_to_subcubic(corpus.complete(5))
    sp = suppress_threads(s.H)
    assert sum(sp.lifted_weight.values()) == 10
    for k, t in sp.thread.items():
        if set(t.edges) <= s.zero_edges:
            assert sp.lifted_weight[k] == 0


# ---------------------------------------------------------------- lifting


def test_lift_even_subgraph_examples():
    G = corpus.theta(1, 2, 3)
    s = split_to_subcubic(G)
    sp = suppress_threads(s.H)
    assert lift_even_subgraph(s, sp, []) == frozenset()
    heavy = [k for k in sp.Hbar.edges if sp.lifted_weight[k] > 1]
    F = lift_even_subgraph(s, sp, heavy)
    assert weight(G, F) == 5 and is_even_subgraph(G, F)
    with pytest.raises(GraphError):
        lift_even_subgraph(s, sp, heavy[:1])


@pytest.mark.parametrize("G", [corpus.complete(5), corpus.complete(6), corpus.complete(7)], ids=["K5", "K6", "K7"])
def test_lift_two_factors_round_trip(G):
    s = split_to_subcubic(G)
    sp = suppress_threads(s.H)
    n = 0
    for cand in enumerate_perfect_matchings(sp.Hbar, limit=40):
        Fbar = frozenset(sp.Hbar.edges) - cand.edges
        F = lift_even_subgraph(s, sp, Fbar)
        assert is_even_subgraph(G, F)
        assert weight(G, F) == sum(sp.lifted_weight[k] for k in Fbar)
        n += 1
    assert n > 0


# ---------------------------------------------------------------- flows across levels


def test_project_flow_identity_and_zero(k4):
    s = split_to_subcubic(k4)
    assert project_flow(s, zero_flow(k4)) == zero_flow(k4)
    tri = [e for e, ed in k4.edges.items() if 3 not in (ed.u, ed.v)]
    f = add_cycle_flow(k4, zero_flow(k4), tri, 2)
    assert project_flow(s, f) == f


@given(st.integers(0, 2**31 - 1))
def test_project_flow_k5_random(seed):
    from cyccov.graphcore import cycle_space_basis
    rng = np.random.default_rng(seed)
    s = split_to_subcubic(corpus.complete(5))
    f = zero_flow(s.H)
    for b in cycle_space_basis(s.H):
        f = add_cycle_flow(s.H, f, b, int(rng.integers(0, 4)))
    g = project_flow(s, f)
    assert check_flow(s.G, g)
    back = lift_flow(s.H, s.zero_edges, g)
    assert check_flow(s.H, back)
    assert all(back[e] == g[e] for e in g)


def test_project_flow_rejects_nonconserving(k4):
    s = split_to_subcubic(k4)
    f = zero_flow(k4)
    f[0] = 1
    with pytest.raises(Exception):
        project_flow(s, f)


# ---------------------------------------------------------------- refinement threads


def test_contract_short_threads_first_index():
    # all threads long: i0 = 1, nothing contracted, q = 5 log2 m
    G = corpus.theta(60, 60, 60)
    C = [e for e in G.edges if e < 120]
    Gc, q, S = contract_short_threads(G, C, 180)
    assert S == frozenset() and q == LogQ(5, 180)


def test_contract_short_threads_explicit_inequality():
    # circuit threads of lengths 2 and 200 on a theta graph, m = 256 (log2 m = 8)
    G = corpus.theta(2, 200, 54)
    assert G.m == 256
    C = [e for e in G.edges if e < 202]
    Gc, q, S = contract_short_threads(G, C, 256)
    # 2 < 5*8 = 40, 200 >= 25*8 = 200  =>  i0 = 2, q = 200
    assert q == LogQ(25, 256) and float(q) == 200.0
    assert len(S) == 2 and Gc.m == 254


def test_contract_short_threads_inapplicable():
    # threads (1, 30), m = 64: 1 < 5*6 and 30 < 25*6 -> no i0
    G = corpus.theta(1, 30, 33)
    C = [e for e in G.edges if e < 31]
    with pytest.raises(RefinementInapplicable):
        contract_short_threads(G, C, 64)
    assert not q_le(LogQ(5, 64), 1) and not q_le(LogQ(25, 64), 30)
