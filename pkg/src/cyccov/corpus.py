"""Graph corpora used by the test suite and the ``batch`` command."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterator, List, Tuple

import networkx as nx
import numpy as np

from .graphcore import Multigraph, disjoint_union, find_bridges


def from_networkx(g) -> Multigraph:
    g = nx.convert_node_labels_to_integers(g, ordering="sorted") if not all(isinstance(v, int) for v in g) else g
    return Multigraph.from_pairs([(u, v) for u, v, *_ in g.edges], g.nodes)


def petersen() -> Multigraph:
    return from_networkx(nx.petersen_graph())


def complete(n: int) -> Multigraph:
    return from_networkx(nx.complete_graph(n))


def cube() -> Multigraph:
    return from_networkx(nx.convert_node_labels_to_integers(nx.hypercube_graph(3), ordering="sorted"))


def circuit(n: int) -> Multigraph:
    if n == 1:
        return Multigraph.from_pairs([(0, 0)])
    return Multigraph.from_pairs([(i, (i + 1) % n) for i in range(n)])


def theta(*lengths: int) -> Multigraph:
    """Two branch vertices 0 and 1 joined by internally disjoint paths of the given lengths."""
    pairs, nxt = [], 2
    for L in lengths:
        prev = 0
        for _ in range(L - 1):
            pairs.append((prev, nxt))
            prev = nxt
            nxt += 1
        pairs.append((prev, 1))
    return Multigraph.from_pairs(pairs)


def subdivide(G: Multigraph, times: Dict[int, int]) -> Multigraph:
    """Subdivide edge ``e`` ``times[e]`` times; edge ids are renumbered consecutively."""
    pairs = []
    nxt = max(G.vertices) + 1
    for eid in G.sorted_edges:
        e = G.edges[eid]
        prev = e.u
        for _ in range(times.get(eid, 0)):
            pairs.append((prev, nxt))
            prev = nxt
            nxt += 1
        pairs.append((prev, e.v))
    return Multigraph.from_pairs(pairs, G.vertices)


def _labelled_cubic_candidates(n: int) -> Iterator[List[Tuple[int, int]]]:
    """Edge lists of cubic simple graphs on ``range(n)``, one or more per isomorphism class.

    Vertices are completed in index order; vertices not yet touched are
    interchangeable, so only the lowest-numbered ones are ever chosen.
    """
    adj: List[set] = [set() for _ in range(n)]

    def rec(i):
        while i < n and len(adj[i]) == 3:
            i += 1
        if i == n:
            yield [(a, b) for a in range(n) for b in sorted(adj[a]) if a < b]
            return
        need = 3 - len(adj[i])
        touched = [j for j in range(i + 1, n) if 0 < len(adj[j]) < 3 and j not in adj[i]]
        fresh = [j for j in range(i + 1, n) if not adj[j]]
        for k in range(min(need, len(fresh)) + 1):
            for tc in combinations(touched, need - k):
                chosen = list(tc) + fresh[:k]
                for j in chosen:
                    adj[i].add(j)
                    adj[j].add(i)
                yield from rec(i + 1)
                for j in chosen:
                    adj[i].discard(j)
                    adj[j].discard(i)

    yield from rec(0)


def _invariant(g: nx.Graph) -> tuple:
    dist = dict(nx.all_pairs_shortest_path_length(g))
    tri = nx.triangles(g)
    return tuple(sorted((tri[v], tuple(sorted(dist[v].values()))) for v in g))


@lru_cache(maxsize=None)
def connected_cubic_graphs(n: int) -> Tuple[Multigraph, ...]:
    """All connected simple cubic graphs on ``n`` vertices (n even, 4 <= n <= 10).

    Exhaustive symmetry-pruned enumeration followed by isomorphism filtering;
    the counts for n = 4, 6, 8, 10 are 1, 2, 5, 19.
    """
    if n < 4 or n % 2:
        return ()
    buckets: Dict[tuple, List[nx.Graph]] = {}
    order = []
    for E in _labelled_cubic_candidates(n):
        g = nx.Graph(E)
        if not nx.is_connected(g):
            continue
        bucket = buckets.setdefault(_invariant(g), [])
        if not any(nx.is_isomorphic(g, h) for h in bucket):
            bucket.append(g)
            order.append(E)
    return tuple(Multigraph.from_pairs(E, range(n)) for E in order)


def bridgeless_cubic_graphs(max_n: int = 10) -> List[Tuple[str, Multigraph]]:
    """Every bridgeless simple cubic graph on at most ``max_n`` vertices, disconnected ones included."""
    conn: Dict[int, List[Multigraph]] = {}
    for n in range(4, max_n + 1, 2):
        conn[n] = [G for G in connected_cubic_graphs(n) if not find_bridges(G)]
    out = []

    def parts(total, smallest, prefix):
        if total == 0:
            if prefix:
                yield prefix
            return
        for n in range(smallest, total + 1, 2):
            for i in range(len(conn.get(n, ()))):
                if prefix and (n, i) < prefix[-1]:
                    continue
                yield from parts(total - n, n, prefix + [(n, i)])

    for total in range(4, max_n + 1, 2):
        for combo in parts(total, 4, []):
            name = "cubic" + "+".join(f"{n}.{i}" for n, i in combo)
            G = disjoint_union([conn[n][i] for n, i in combo])
            out.append((name, G))
    return out


def bridgeless_simple_graphs(max_n: int = 7) -> List[Tuple[str, Multigraph]]:
    """Bridgeless simple graphs with at least one edge on at most ``max_n`` vertices (graph atlas)."""
    if max_n > 7:
        raise ValueError("the graph atlas only reaches 7 vertices")
    out = []
    for i, g in enumerate(nx.graph_atlas_g()):
        if g.number_of_nodes() > max_n or g.number_of_edges() == 0:
            continue
        G = from_networkx(g)
        if not find_bridges(G):
            out.append((f"atlas{i}", G))
    return out


def random_bridgeless_multigraph(rng: np.random.Generator, max_m: int = 60) -> Multigraph:
    """Ear-built 2-edge-connected multigraph with chains, parallel edges and loops."""
    target = int(rng.integers(3, max_m + 1))
    L = int(rng.integers(1, 7))
    pairs = [(i, (i + 1) % L) for i in range(L)] if L > 1 else [(0, 0)]
    nverts = L
    while len(pairs) < target:
        room = target - len(pairs)
        a, b = (int(x) for x in rng.integers(0, nverts, size=2))
        if rng.random() < 0.15:
            b = a
        k = int(rng.integers(0, min(6, room)))  # internal vertices of the ear
        if a == b and k == 0 and rng.random() < 0.7:
            k = 1 if room >= 2 else 0
        chain = [a] + list(range(nverts, nverts + k)) + [b]
        nverts += k
        pairs.extend(zip(chain[:-1], chain[1:]))
    return Multigraph.from_pairs(pairs, range(nverts))


def random_corpus(count: int = 200, seed: int = 2024, max_m: int = 60) -> List[Tuple[str, Multigraph]]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        G = random_bridgeless_multigraph(rng, max_m)
        if rng.random() < 0.1:
            H = random_bridgeless_multigraph(rng, max(3, max_m - G.m))
            if G.m + H.m <= max_m:
                G = disjoint_union([G, H])
        out.append((f"rand{i}", G))
    return out


def acceptance_corpus(seed: int = 2024) -> List[Tuple[str, Multigraph]]:
    return bridgeless_cubic_graphs(10) + bridgeless_simple_graphs(7) + random_corpus(200, seed)
