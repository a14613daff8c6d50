"""Perfect matchings of the suppressed cubic graph and the choice of the big cycle F."""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from .graphcore import EdgeId, EdgeSet, Multigraph
from .reduce import SplitGraph, SuppressedGraph, lift_even_subgraph, lift_to_split

DEFAULT_LIMIT = 10_000


class NoPerfectMatching(RuntimeError):
    pass


class FGuaranteeViolated(RuntimeError):
    pass


@dataclass(frozen=True)
class MatchingCandidate:
    edges: EdgeSet
    weight: int
    d1: int


def _edge_costs(Hbar: Multigraph, lifted_weight: Optional[Mapping[EdgeId, int]],
                lifted_d1: Optional[Mapping[EdgeId, int]]) -> Dict[EdgeId, Tuple[int, int]]:
    lw = lifted_weight or {}
    ld = lifted_d1 or {}
    return {e: (lw.get(e, Hbar.edges[e].weight), ld.get(e, 0)) for e in Hbar.edges}


def enumerate_perfect_matchings(Hbar: Multigraph, limit: int = DEFAULT_LIMIT,
                                lifted_weight: Optional[Mapping[EdgeId, int]] = None,
                                lifted_d1: Optional[Mapping[EdgeId, int]] = None,
                                rank: Optional[Mapping[EdgeId, int]] = None) -> Iterator[MatchingCandidate]:
    """Yield perfect matchings in nondecreasing (lifted weight, lifted d1).

    Best-first branch and bound: a partial matching is scored by its cost plus,
    for every unmatched vertex, half the cheapest edge to another unmatched
    vertex (an admissible bound, so completed matchings pop in order).  Equal
    scores prefer deeper states, which keeps plateaus depth-first.  Branching
    happens on the unmatched vertex with the fewest usable edges.
    """
    cost = _edge_costs(Hbar, lifted_weight, lifted_d1)
    rank = rank or {e: e for e in Hbar.edges}
    verts = Hbar.sorted_vertices
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    if n % 2:
        raise NoPerfectMatching("odd number of vertices")
    inc: List[List[Tuple[int, EdgeId]]] = [[] for _ in verts]
    for eid in sorted(Hbar.edges, key=lambda e: (cost[e], rank[e])):
        e = Hbar.edges[eid]
        if e.is_loop:
            continue
        a, b = idx[e.u], idx[e.v]
        inc[a].append((b, eid))
        inc[b].append((a, eid))
    full = (1 << n) - 1

    def bound(matched: int):
        hw = hd = 0
        pick, pick_opts = -1, None
        for v in range(n):
            if matched >> v & 1:
                continue
            opts = [(w, eid) for w, eid in inc[v] if not matched >> w & 1]
            if not opts:
                return None
            c = cost[opts[0][1]]
            hw += c[0]
            hd += min(cost[eid][1] for _, eid in opts)
            if pick_opts is None or len(opts) < len(pick_opts):
                pick, pick_opts = v, opts
        return hw, hd, pick, pick_opts

    counter = itertools.count()
    heap = []
    root = bound(0)
    if root is None and n:
        raise NoPerfectMatching("a vertex has no usable edge")
    if n == 0:
        yield MatchingCandidate(frozenset(), 0, 0)
        return
    hw, hd, pick, opts = root
    heap.append(((hw, hd), 0, next(counter), 0, 0, 0, (), pick, opts))
    produced = 0
    while heap and produced < limit:
        key, negdepth, _, matched, W, D, chosen, pick, opts = heapq.heappop(heap)
        if matched == full:
            produced += 1
            yield MatchingCandidate(frozenset(chosen), W, D)
            continue
        for w, eid in opts:
            nm = matched | (1 << pick) | (1 << w)
            cw, cd = cost[eid]
            nW, nD = W + cw, D + cd
            nch = chosen + (eid,)
            if nm == full:
                heapq.heappush(heap, ((2 * nW, 2 * nD), negdepth - 1, next(counter), nm, nW, nD, nch, -1, ()))
                continue
            b = bound(nm)
            if b is None:
                continue
            bw, bd, npick, nopts = b
            heapq.heappush(heap, ((2 * nW + bw, 2 * nD + bd), negdepth - 1, next(counter),
                                  nm, nW, nD, nch, npick, nopts))
    if produced == 0 and not heap:
        raise NoPerfectMatching("cubic graph has no perfect matching")


@dataclass(frozen=True)
class FSelection:
    F: EdgeSet            # edges of the original graph
    FH: EdgeSet           # the same cycle in the split graph (weight-0 edges included)
    Fbar: EdgeSet         # the 2-factor of Hbar
    matching: MatchingCandidate


def candidate_to_F(split: SplitGraph, supp: SuppressedGraph, cand: MatchingCandidate) -> FSelection:
    Fbar = frozenset(supp.Hbar.edges) - cand.edges
    F = lift_even_subgraph(split, supp, Fbar)
    FH = lift_to_split(supp, Fbar)
    return FSelection(F, FH, Fbar, cand)


def required_F_weight(m: int) -> int:
    return -(-2 * m // 3)


def iter_F(split: SplitGraph, supp: SuppressedGraph, limit: int = DEFAULT_LIMIT,
           rank: Optional[Mapping[EdgeId, int]] = None) -> Iterator[FSelection]:
    """Candidate cycles F in order of decreasing weight; only those with w(F) >= ceil(2m/3)."""
    m = split.G.total_weight
    need = required_F_weight(m)
    for cand in enumerate_perfect_matchings(supp.Hbar, limit, supp.lifted_weight, supp.lifted_d1, rank):
        if m - cand.weight < need:
            break
        yield candidate_to_F(split, supp, cand)


def select_F(split: SplitGraph, supp: SuppressedGraph, limit: int = DEFAULT_LIMIT,
             rank: Optional[Mapping[EdgeId, int]] = None) -> FSelection:
    """F from the minimum lifted-weight perfect matching (ties: fewer degree-2 vertices off F)."""
    for sel in iter_F(split, supp, limit, rank):
        return sel
    m = split.G.total_weight
    raise FGuaranteeViolated(f"no perfect matching leaves a cycle of weight >= {required_F_weight(m)} (m={m})")
