"""Reduction of a bridgeless graph to a bridgeless cubic graph and back.

Loops are stripped, vertices of degree >= 4 are split (the two halves joined
by a weight-0 edge) until the graph is subcubic, and threads are suppressed to
single edges.  Every step keeps enough bookkeeping to lift even subgraphs back
to the input graph and to move flows between levels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from .graphcore import (
    Edge,
    EdgeId,
    EdgeSet,
    GraphError,
    Multigraph,
    Thread,
    VertexId,
    check_edges,
    circuit_order,
    contract_edges,
    find_bridges,
    is_even_subgraph,
    threads_of,
)
from .flows import Flow, FlowError, LogQ, check_flow, q_le, solve_forest


class SplittingLemmaViolated(RuntimeError):
    """No split pair kept the graph bridgeless; indicates a bug, not bad input."""


@dataclass(frozen=True)
class SplitGraph:
    G: Multigraph
    H: Multigraph
    origin_vertex: Mapping[VertexId, VertexId]
    # weight-1 edges of H keep the ids they have in G
    zero_edges: EdgeSet
    splits: Tuple[Tuple[VertexId, VertexId, Tuple[EdgeId, EdgeId], EdgeId], ...] = ()

    @property
    def origin_edge(self) -> Dict[EdgeId, EdgeId]:
        return {e: e for e in self.H.edges if e not in self.zero_edges}


@dataclass(frozen=True)
class SuppressedGraph:
    H: Multigraph
    Hbar: Multigraph
    thread: Mapping[EdgeId, Thread]
    lifted_weight: Mapping[EdgeId, int]
    # degree-2 vertices interior to each thread
    lifted_d1: Mapping[EdgeId, int] = field(default_factory=dict)


def strip_loops(G: Multigraph) -> Tuple[Multigraph, List[EdgeId]]:
    loops = [e for e in G.sorted_edges if G.edges[e].is_loop]
    if not loops:
        return G, []
    return G.without_edges(loops), loops


def split_vertex(G: Multigraph, v: VertexId, pair: Sequence[EdgeId],
                 new_vertex: VertexId = None, zero_edge: EdgeId = None) -> Multigraph:
    """Move the incidences ``pair`` of ``v`` to a new vertex joined to ``v`` by a weight-0 edge."""
    if v not in G.vertices:
        raise GraphError(f"unknown vertex {v}")
    if len(G.incidence[v]) < 4:
        raise GraphError(f"vertex {v} has degree {len(G.incidence[v])} < 4")
    a, b = pair
    if a == b or a not in G.incidence[v] or b not in G.incidence[v]:
        raise GraphError(f"{pair} is not a pair of distinct incidences at {v}")
    if G.edges[a].is_loop or G.edges[b].is_loop:
        raise GraphError("loops cannot be split off")
    nv = max(G.vertices) + 1 if new_vertex is None else new_vertex
    ze = max(G.edges, default=-1) + 1 if zero_edge is None else zero_edge
    if nv in G.vertices or ze in G.edges:
        raise GraphError("requested ids already in use")
    edges = dict(G.edges)
    for eid in (a, b):
        e = edges[eid]
        edges[eid] = Edge(nv if e.u == v else e.u, nv if e.v == v else e.v, e.weight)
    edges[ze] = Edge(v, nv, 0)
    return Multigraph(G.vertices | {nv}, edges)


def split_to_subcubic(G: Multigraph) -> SplitGraph:
    """Split every vertex of degree >= 4, trying incidence pairs in sorted order.

    Every accepted pair keeps H bridgeless.  Among those, the first pair that
    also keeps H minus its weight-0 edges bridgeless is taken.  At a vertex of
    odd degree >= 5 no sequence of splits can achieve that (one piece of the
    vertex ends up with a single real edge), so there the pair leaving the
    fewest bridges in H minus weight-0 edges is taken instead.
    """
    if find_bridges(G):
        raise GraphError("split_to_subcubic needs a bridgeless graph")
    if any(e.is_loop for e in G.edges.values()):
        raise GraphError("split_to_subcubic needs a loopless graph")
    H = G
    origin = {v: v for v in G.vertices}
    zero: FrozenSet[EdgeId] = frozenset()
    splits = []
    while True:
        big = [v for v in H.sorted_vertices if len(H.incidence[v]) >= 4]
        if not big:
            break
        v = big[0]
        best = None
        for pair in combinations(H.incidence[v], 2):
            if pair[0] == pair[1]:
                continue
            cand = split_vertex(H, v, pair)
            ze = max(cand.edges)
            if find_bridges(cand):
                continue
            nb = len(find_bridges(cand.without_edges(zero | {ze})))
            if best is None or nb < best[0]:
                best = (nb, pair, cand, ze)
                if nb == 0:
                    break
        if best is None:
            raise SplittingLemmaViolated(f"splitting lemma violated at vertex {v}")
        _, pair, H, ze = best
        nv = max(H.vertices)
        origin[nv] = origin[v]
        zero = zero | {ze}
        splits.append((v, nv, tuple(pair), ze))
    return SplitGraph(G, H, origin, zero, tuple(splits))


def suppress_threads(H: Multigraph) -> SuppressedGraph:
    """Replace each thread by one edge; the new edge reuses the thread's smallest edge id."""
    for v in H.sorted_vertices:
        d = len(H.incidence[v])
        if d > 3:
            raise GraphError(f"vertex {v} has degree {d}; input must be subcubic")
        if d == 1:
            raise GraphError(f"vertex {v} has degree 1; input must be bridgeless")
    threads = threads_of(H)
    keep = {v for v in H.vertices if len(H.incidence[v]) == 3}
    edges, tmap, lw, d1 = {}, {}, {}, {}
    for t in threads:
        a, b = t.ends
        edges[t.key] = Edge(a, b, 1 if t.weight else 0)
        tmap[t.key] = t
        lw[t.key] = t.weight
        d1[t.key] = len(t.interior)
    Hbar = Multigraph(frozenset(keep), edges)
    return SuppressedGraph(H, Hbar, tmap, lw, d1)


def lift_to_split(supp: SuppressedGraph, Fbar: Iterable[EdgeId]) -> EdgeSet:
    """Expand Hbar edges to their threads in H (weight-0 edges kept)."""
    Fbar = check_edges(supp.Hbar, Fbar)
    return frozenset(e for k in Fbar for e in supp.thread[k].edges)


def lift_even_subgraph(split: SplitGraph, supp: SuppressedGraph, Fbar: Iterable[EdgeId]) -> EdgeSet:
    """Lift an even subgraph of Hbar to an even subgraph of the original graph."""
    Fbar = check_edges(supp.Hbar, Fbar)
    if not is_even_subgraph(supp.Hbar, Fbar):
        raise GraphError("lift_even_subgraph needs an even subgraph of Hbar")
    FH = lift_to_split(supp, Fbar)
    out = frozenset(e for e in FH if e not in split.zero_edges)
    if not is_even_subgraph(split.G, out):
        raise GraphError("lifted edge set is not even; bookkeeping is inconsistent")
    return out


def project_flow(split: SplitGraph, f: Mapping[EdgeId, int], host: Multigraph = None) -> Flow:
    """Restrict a flow on ``host`` (default H) to the original graph's edges."""
    host = split.H if host is None else host
    if not check_flow(host, f):
        raise FlowError("project_flow needs a conserving flow")
    g = {e: f[e] for e in split.G.edges}
    if not check_flow(split.G, g):
        raise FlowError("projected flow does not conserve")
    return g


def lift_flow(host: Multigraph, zero_edges: Iterable[EdgeId], f: Mapping[EdgeId, int]) -> Flow:
    """Lift a flow of the original graph to ``host``, solving the weight-0 forest."""
    zero = [e for e in sorted(zero_edges) if e in host.edges]
    base = {e: f[e] for e in host.edges if e not in set(zero)}
    g = solve_forest(host, zero, base)
    if not check_flow(host, g):
        raise FlowError("lifted flow does not conserve")
    return g


class RefinementInapplicable(Exception):
    pass


def circuit_threads(G: Multigraph, C: Iterable[EdgeId]) -> List[List[EdgeId]]:
    """Threads of ``G`` lying on circuit ``C``, each as an edge list in circuit order."""
    order_e, order_v = circuit_order(G, C)
    p = len(order_e)
    branch = [i for i, v in enumerate(order_v) if len(G.incidence[v]) != 2]
    if not branch:
        return [order_e]
    out = []
    for k, i in enumerate(branch):
        j = branch[(k + 1) % len(branch)]
        span = (j - i) % p or p
        out.append([order_e[(i + t) % p] for t in range(span)])
    return out


def contract_short_threads(G: Multigraph, C: Iterable[EdgeId], m: int):
    """Contract the threads of ``C`` before the first one long enough for its rank.

    With threads sorted by weighted length, ``i0`` is the least (1-based) index
    with ``len(e_i) >= 5**i * log2(m)``.  Returns ``(G/S, q, S)`` with
    ``q = 5**i0 * log2(m)`` as an exact :class:`LogQ`.
    """
    C = check_edges(G, C)
    threads = circuit_threads(G, C)
    lens = [(sum(G.edges[e].weight for e in t), min(t), t) for t in threads]
    lens.sort(key=lambda x: (x[0], x[1]))
    for i, (L, _, _) in enumerate(lens, start=1):
        if q_le(LogQ(5 ** i, m), L):
            S = frozenset(e for _, _, t in lens[: i - 1] for e in t)
            Gc, _ = contract_edges(G, S)
            return Gc, LogQ(5 ** i, m), S
    raise RefinementInapplicable("no thread index satisfies the length threshold")
