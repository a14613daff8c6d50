import itertools

import pytest

from cyccov import corpus
from cyccov.graphcore import Multigraph, is_even_subgraph, weight
from cyccov.matching import (
    NoPerfectMatching,
    enumerate_perfect_matchings,
    iter_F,
    required_F_weight,
    select_F,
)
from cyccov.reduce import split_to_subcubic, suppress_threads


def brute_matchings(G: Multigraph):
    """All perfect matchings by brute force over edge subsets of size n/2."""
    n = G.n
    out = []
    for combo in itertools.combinations(sorted(e for e in G.edges if not G.edges[e].is_loop), n // 2):
        ends = [x for e in combo for x in (G.edges[e].u, G.edges[e].v)]
        if len(set(ends)) == n:
            out.append(frozenset(combo))
    return out


def context(G):
    s = split_to_subcubic(G)
    return s, suppress_threads(s.H)


def test_theta_three_matchings():
    H = Multigraph.from_pairs([(0, 1), (0, 1), (0, 1)])
    ms = list(enumerate_perfect_matchings(H))
    assert len(ms) == 3 and all(len(m.edges) == 1 for m in ms)


@pytest.mark.parametrize("G,count", [(corpus.complete(4), 3), (corpus.petersen(), 6), (corpus.cube(), 9)],
                         ids=["K4", "Petersen", "Q3"])
def test_matching_counts(G, count):
    ms = list(enumerate_perfect_matchings(G))
    assert len(ms) == count
    assert {m.edges for m in ms} == set(brute_matchings(G))


@pytest.mark.parametrize("name,G", corpus.bridgeless_cubic_graphs(10)[::4])
def test_matchings_sorted_and_complete(name, G):
    ms = list(enumerate_perfect_matchings(G))
    assert [m.weight for m in ms] == sorted(m.weight for m in ms)
    assert len({m.edges for m in ms}) == len(ms) == len(brute_matchings(G))


def test_lifted_order_theta():
    s, sp = context(corpus.theta(1, 2, 3))
    ms = list(enumerate_perfect_matchings(sp.Hbar, lifted_weight=sp.lifted_weight, lifted_d1=sp.lifted_d1))
    assert [m.weight for m in ms] == [1, 2, 3]


def test_limit_respected(petersen):
    assert len(list(enumerate_perfect_matchings(petersen, limit=2))) == 2


def test_no_perfect_matching():
    # odd vertex count
    G = Multigraph.from_pairs([(0, 1), (1, 2), (2, 0)])
    with pytest.raises(NoPerfectMatching):
        list(enumerate_perfect_matchings(G))


def test_select_F_petersen(petersen):
    s, sp = context(petersen)
    sel = select_F(s, sp)
    assert weight(petersen, sel.F) == 10 == required_F_weight(15)
    assert sel.matching.weight == 5
    # every perfect matching of Petersen weighs 5
    assert all(m.weight == 5 for m in enumerate_perfect_matchings(sp.Hbar))


def test_select_F_theta():
    G = corpus.theta(1, 2, 3)
    s, sp = context(G)
    sel = select_F(s, sp)
    assert sel.matching.weight == 1 and weight(G, sel.F) == 5 >= required_F_weight(6) == 4
    assert is_even_subgraph(G, sel.F)


def test_select_F_cube(q3):
    s, sp = context(q3)
    sel = select_F(s, sp)
    assert sel.matching.weight == 4 and weight(q3, sel.F) == 8 == required_F_weight(12)


def test_iter_F_respects_guarantee():
    G = corpus.complete(7)
    s, sp = context(G)
    sels = list(iter_F(s, sp, limit=50))
    assert sels
    assert all(weight(G, x.F) >= required_F_weight(G.m) for x in sels)
    assert [weight(G, x.F) for x in sels] == sorted((weight(G, x.F) for x in sels), reverse=True)


def test_seeded_rank_changes_tie_break_only(petersen):
    s, sp = context(petersen)
    a = [m.edges for m in enumerate_perfect_matchings(sp.Hbar)]
    rank = {e: (7 * e + 3) % 15 for e in sp.Hbar.edges}
    b = [m.edges for m in enumerate_perfect_matchings(sp.Hbar, rank=rank)]
    assert set(a) == set(b)


def test_required_F_weight():
    assert [required_F_weight(m) for m in (3, 4, 5, 6, 15)] == [2, 3, 4, 4, 10]
