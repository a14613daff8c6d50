"""Multigraph representation and the elementary algorithms the pipeline is built on.

Vertices and edges are identified by integers.  Loops and parallel edges are
allowed; a loop contributes 2 to the degree of its vertex.  Every edge carries a
weight in {0, 1}; weight-0 edges are artefacts of vertex splitting and are
invisible to all length accounting.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

VertexId = int
EdgeId = int
EdgeSet = FrozenSet[EdgeId]


class GraphError(ValueError):
    """Raised for malformed graphs or arguments that do not belong to a graph."""


class Edge(NamedTuple):
    u: VertexId
    v: VertexId
    weight: int = 1

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def other(self, x: VertexId) -> VertexId:
        return self.v if x == self.u else self.u


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Immutable loop/parallel-edge capable graph with {0,1} edge weights."""

    vertices: FrozenSet[VertexId]
    edges: Mapping[EdgeId, Edge]

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        edges = {}
        for eid in sorted(self.edges):
            e = self.edges[eid]
            e = Edge(*e)
            if e.u not in self.vertices or e.v not in self.vertices:
                raise GraphError(f"edge {eid} has an endpoint outside the vertex set")
            if e.weight not in (0, 1):
                raise GraphError(f"edge {eid} has weight {e.weight}, expected 0 or 1")
            edges[eid] = e
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]], vertices: Iterable[int] = ()) -> "Multigraph":
        """Build a unit-weight graph with edge ids 0, 1, 2, ... in the order given."""
        verts = set(vertices)
        edges = {}
        for i, (u, v) in enumerate(pairs):
            verts.update((u, v))
            edges[i] = Edge(u, v, 1)
        return cls(frozenset(verts), edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def incidence(self) -> Dict[VertexId, Tuple[EdgeId, ...]]:
        """Incident edge ids per vertex; a loop is listed twice."""
        inc: Dict[VertexId, List[EdgeId]] = {v: [] for v in self.vertices}
        for eid, e in self.edges.items():
            inc[e.u].append(eid)
            inc[e.v].append(eid)
        return {v: tuple(sorted(lst)) for v, lst in inc.items()}

    @cached_property
    def sorted_vertices(self) -> Tuple[VertexId, ...]:
        return tuple(sorted(self.vertices))

    @cached_property
    def sorted_edges(self) -> Tuple[EdgeId, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def total_weight(self) -> int:
        return sum(e.weight for e in self.edges.values())

    def degree(self, v: VertexId) -> int:
        return degree(self, v)

    def subgraph_edges(self, S: Iterable[EdgeId]) -> "Multigraph":
        """Spanning subgraph (all vertices kept) on the edge subset ``S``."""
        S = check_edges(self, S)
        return Multigraph(self.vertices, {e: self.edges[e] for e in S})

    def without_edges(self, S: Iterable[EdgeId]) -> "Multigraph":
        S = check_edges(self, S)
        return Multigraph(self.vertices, {e: x for e, x in self.edges.items() if e not in S})

    def __repr__(self) -> str:
        return f"Multigraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class EvenSubgraph:
    """An edge subset of ``host`` in which every vertex has even degree."""

    host: Multigraph
    edges: EdgeSet = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        if not is_even_subgraph(self.host, self.edges):
            raise GraphError("edge set is not an even subgraph of its host")

    def __xor__(self, other: "EvenSubgraph") -> "EvenSubgraph":
        return symmetric_difference(self, other)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def weight(self) -> int:
        return weight(self.host, self.edges)


@dataclass(frozen=True)
class Thread:
    """Maximal path whose interior vertices have degree exactly 2."""

    edges: Tuple[EdgeId, ...]
    ends: Tuple[VertexId, VertexId]
    interior: Tuple[VertexId, ...]
    weight: int

    @property
    def key(self) -> EdgeId:
        return min(self.edges)


@dataclass(frozen=True)
class ContractionMap:
    vertex_map: Mapping[VertexId, VertexId]
    # contracted edge id -> host edge id; surviving edges keep their ids
    edge_map: Mapping[EdgeId, EdgeId]


def check_edges(G: Multigraph, S: Iterable[EdgeId]) -> EdgeSet:
    S = frozenset(S)
    bad = S - G.edges.keys()
    if bad:
        raise GraphError(f"edge ids not in graph: {sorted(bad)}")
    return S


def degree(G: Multigraph, v: VertexId) -> int:
    if v not in G.vertices:
        raise GraphError(f"unknown vertex {v}")
    return len(G.incidence[v])


def subset_degrees(G: Multigraph, S: Iterable[EdgeId]) -> Dict[VertexId, int]:
    deg: Dict[VertexId, int] = {}
    for eid in S:
        e = G.edges[eid]
        deg[e.u] = deg.get(e.u, 0) + 1
        deg[e.v] = deg.get(e.v, 0) + 1
    return deg


def odd_vertices(G: Multigraph, S: Iterable[EdgeId]) -> List[VertexId]:
    return sorted(v for v, d in subset_degrees(G, S).items() if d % 2)


def is_even_subgraph(G: Multigraph, S: Iterable[EdgeId]) -> bool:
    S = check_edges(G, S)
    return not odd_vertices(G, S)


def symmetric_difference(S, T):
    """``S Δ T`` for two edge sets, or for two :class:`EvenSubgraph` of one host."""
    if isinstance(S, EvenSubgraph) or isinstance(T, EvenSubgraph):
        if not (isinstance(S, EvenSubgraph) and isinstance(T, EvenSubgraph)):
            raise GraphError("cannot mix EvenSubgraph with a bare edge set")
        if S.host is not T.host:
            raise GraphError("even subgraphs live on different host graphs")
        return EvenSubgraph(S.host, S.edges ^ T.edges)
    return frozenset(S) ^ frozenset(T)


def weight(G: Multigraph, S: Iterable[EdgeId]) -> int:
    return sum(G.edges[e].weight for e in check_edges(G, S))


class _DSU:
    def __init__(self, items: Iterable[int]):
        self.parent = {x: x for x in items}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def connected_components(G: Multigraph) -> List[FrozenSet[VertexId]]:
    dsu = _DSU(G.vertices)
    for e in G.edges.values():
        dsu.union(e.u, e.v)
    groups: Dict[int, set] = {}
    for v in G.sorted_vertices:
        groups.setdefault(dsu.find(v), set()).add(v)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def edge_components(G: Multigraph, S: Iterable[EdgeId]) -> List[EdgeSet]:
    """Edge sets of the connected components of the subgraph formed by ``S``."""
    S = check_edges(G, S)
    dsu = _DSU(G.vertices)
    for eid in S:
        e = G.edges[eid]
        dsu.union(e.u, e.v)
    groups: Dict[int, set] = {}
    for eid in sorted(S):
        groups.setdefault(dsu.find(G.edges[eid].u), set()).add(eid)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def find_bridges(G: Multigraph) -> EdgeSet:
    """Edges whose removal disconnects their component (iterative lowlink DFS).

    The DFS skips the tree edge by id rather than by parent vertex, so a
    parallel copy of a tree edge correctly counts as a back edge.
    """
    pre: Dict[VertexId, int] = {}
    low: Dict[VertexId, int] = {}
    bridges = set()
    counter = 0
    inc = G.incidence
    for root in G.sorted_vertices:
        if root in pre:
            continue
        pre[root] = low[root] = counter
        counter += 1
        stack = [(root, None, iter(inc[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for eid in it:
                if eid == via:
                    continue
                e = G.edges[eid]
                if e.is_loop:
                    continue
                w = e.other(v)
                if w in pre:
                    low[v] = min(low[v], pre[w])
                else:
                    pre[w] = low[w] = counter
                    counter += 1
                    stack.append((w, eid, iter(inc[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > pre[parent]:
                        bridges.add(via)
    return frozenset(bridges)


def is_circuit_component(G: Multigraph, comp: Iterable[VertexId]) -> bool:
    comp = list(comp)
    if not any(G.incidence[v] for v in comp):
        return False
    return all(len(G.incidence[v]) == 2 for v in comp)


def threads_of(G: Multigraph) -> List[Thread]:
    """Partition the non-loop edges into maximal threads.

    Raises :class:`GraphError` if some component is a circuit; such components
    have no thread endpoints and are handled by the caller.
    """
    for comp in connected_components(G):
        if is_circuit_component(G, comp):
            raise GraphError(f"component containing vertex {min(comp)} is a circuit")
    inc = G.incidence
    used = set()
    threads = []
    for start in G.sorted_vertices:
        if len(inc[start]) == 2:
            continue
        for first in inc[start]:
            if first in used or G.edges[first].is_loop:
                continue
            seq, interior = [first], []
            used.add(first)
            v = G.edges[first].other(start)
            while len(inc[v]) == 2:
                interior.append(v)
                nxt = next(e for e in inc[v] if e not in used)
                used.add(nxt)
                seq.append(nxt)
                v = G.edges[nxt].other(v)
            threads.append(Thread(tuple(seq), (start, v), tuple(interior),
                                  sum(G.edges[e].weight for e in seq)))
    return sorted(threads, key=lambda t: t.key)


def thread_weights(G: Multigraph) -> Dict[EdgeId, int]:
    """Weighted length of the thread through each edge.

    Unlike :func:`threads_of`, circuit components are allowed: every edge of a
    circuit component gets the weight of the whole circuit.  A loop at a vertex
    of degree > 2 is its own thread.
    """
    cached = G.__dict__.get("_thread_weights")
    if cached is not None:
        return dict(cached)
    out: Dict[EdgeId, int] = {}
    circuit_edges = set()
    for comp in connected_components(G):
        if is_circuit_component(G, comp):
            es = {e for v in comp for e in G.incidence[v]}
            w = weight(G, es)
            for e in es:
                out[e] = w
            circuit_edges |= es
    rest = G.without_edges(circuit_edges)
    for t in threads_of(rest):
        for e in t.edges:
            out[e] = t.weight
    for eid, e in G.edges.items():
        if e.is_loop and eid not in out:
            out[eid] = e.weight
    G.__dict__["_thread_weights"] = dict(out)  # graphs are immutable, so the map can be memoised
    return out


def contract_edges(G: Multigraph, S: Iterable[EdgeId]) -> Tuple[Multigraph, ContractionMap]:
    """Contract every edge of ``S``; each group of merged vertices keeps its smallest id."""
    S = check_edges(G, S)
    dsu = _DSU(G.vertices)
    for eid in sorted(S):
        e = G.edges[eid]
        dsu.union(e.u, e.v)
    vmap = {v: dsu.find(v) for v in G.sorted_vertices}
    edges = {}
    for eid, e in G.edges.items():
        if eid not in S:
            edges[eid] = Edge(vmap[e.u], vmap[e.v], e.weight)
    Gc = Multigraph(frozenset(vmap.values()), edges)
    return Gc, ContractionMap(vmap, {e: e for e in edges})


def spanning_forest(G: Multigraph, S: Optional[Iterable[EdgeId]] = None) -> List[EdgeId]:
    """A BFS spanning forest of the subgraph on ``S`` (default: all edges), as tree edge ids."""
    S = G.edges.keys() if S is None else check_edges(G, S)
    S = frozenset(S)
    seen = set()
    tree = []
    inc = G.incidence
    for root in G.sorted_vertices:
        if root in seen:
            continue
        seen.add(root)
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for eid in inc[v]:
                if eid not in S:
                    continue
                w = G.edges[eid].other(v)
                if w not in seen:
                    seen.add(w)
                    tree.append(eid)
                    queue.append(w)
    return tree


def tree_path(G: Multigraph, tree: Iterable[EdgeId], a: VertexId, b: VertexId) -> List[EdgeId]:
    """Edge sequence of the unique ``a``-``b`` path inside the forest ``tree``."""
    adj: Dict[VertexId, List[Tuple[VertexId, EdgeId]]] = {}
    for eid in tree:
        e = G.edges[eid]
        adj.setdefault(e.u, []).append((e.v, eid))
        adj.setdefault(e.v, []).append((e.u, eid))
    prev: Dict[VertexId, Tuple[VertexId, EdgeId]] = {a: (a, -1)}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        if v == b:
            break
        for w, eid in adj.get(v, ()):
            if w not in prev:
                prev[w] = (v, eid)
                queue.append(w)
    if b not in prev:
        raise GraphError(f"no tree path between {a} and {b}")
    path = []
    v = b
    while v != a:
        v, eid = prev[v]
        path.append(eid)
    path.reverse()
    return path


def find_cycle_within(G: Multigraph, S: Iterable[EdgeId]) -> Optional[List[EdgeId]]:
    """Some circuit inside ``S`` as an edge list, or ``None`` if ``S`` is a forest."""
    S = check_edges(G, S)
    for eid in sorted(S):
        if G.edges[eid].is_loop:
            return [eid]
    dsu = _DSU(G.vertices)
    tree = []
    for eid in sorted(S):
        e = G.edges[eid]
        if dsu.union(e.u, e.v):
            tree.append(eid)
        else:
            return tree_path(G, tree, e.v, e.u) + [eid]
    return None


def is_circuit(G: Multigraph, S: Iterable[EdgeId]) -> bool:
    """True iff ``S`` is nonempty, connected and 2-regular (loops are length-1 circuits)."""
    S = check_edges(G, S)
    if not S:
        return False
    deg = subset_degrees(G, S)
    if any(d != 2 for d in deg.values()):
        return False
    return len(edge_components(G, S)) == 1


def circuit_order(G: Multigraph, C: Iterable[EdgeId]) -> Tuple[List[EdgeId], List[VertexId]]:
    """Cyclic order of a circuit: edges ``e_i`` joins vertices ``v_i`` and ``v_{i+1}``.

    Starts at the smallest edge id and walks toward the neighbouring edge with
    the smaller id.
    """
    C = check_edges(G, C)
    memo = G.__dict__.setdefault("_circuit_orders", {})
    hit = memo.get(C)
    if hit is not None:
        return list(hit[0]), list(hit[1])
    if not is_circuit(G, C):
        raise GraphError("edge set is not a circuit")
    order_e, order_v = _circuit_order(G, C)
    if len(memo) < 4096:
        memo[C] = (tuple(order_e), tuple(order_v))
    return order_e, order_v


def _circuit_order(G: Multigraph, C: EdgeSet) -> Tuple[List[EdgeId], List[VertexId]]:
    edges = sorted(C)
    e0 = edges[0]
    if len(C) == 1:
        u = G.edges[e0].u
        return [e0], [u]
    if len(C) == 2:
        e1 = edges[1]
        a, b = G.edges[e0].u, G.edges[e0].v
        return [e0, e1], [a, b]
    a, b = G.edges[e0].u, G.edges[e0].v
    at_a = next(e for e in G.incidence[a] if e in C and e != e0)
    at_b = next(e for e in G.incidence[b] if e in C and e != e0)
    # walking a -> b means the next edge is at_b
    start, cur = (a, b) if at_b < at_a else (b, a)
    order_e, order_v = [e0], [start]
    prev_e, v = e0, cur
    while v != start:
        order_v.append(v)
        nxt = next(e for e in G.incidence[v] if e in C and e != prev_e)
        order_e.append(nxt)
        prev_e = nxt
        v = G.edges[nxt].other(v)
    return order_e, order_v


def cycle_space_basis(G: Multigraph) -> List[EdgeSet]:
    """Fundamental circuits with respect to a BFS spanning forest."""
    tree = spanning_forest(G)
    tree_set = set(tree)
    basis = []
    for eid in G.sorted_edges:
        if eid in tree_set:
            continue
        e = G.edges[eid]
        if e.is_loop:
            basis.append(frozenset([eid]))
        else:
            basis.append(frozenset(tree_path(G, tree, e.u, e.v)) | {eid})
    return basis


def cycle_space_dimension(G: Multigraph) -> int:
    return G.m - G.n + len(connected_components(G))


def disjoint_union(graphs: Sequence[Multigraph]) -> Multigraph:
    """Relabel and place graphs side by side (vertex and edge ids become consecutive)."""
    verts, edges = [], {}
    voff = 0
    for H in graphs:
        vm = {v: voff + i for i, v in enumerate(H.sorted_vertices)}
        verts.extend(vm.values())
        for eid in H.sorted_edges:
            e = H.edges[eid]
            edges[len(edges)] = Edge(vm[e.u], vm[e.v], e.weight)
        voff += H.n
    return Multigraph(frozenset(verts), edges)


def relabel(G: Multigraph) -> Multigraph:
    return disjoint_union([G])
