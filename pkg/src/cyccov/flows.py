"""Z2 x Z2 (Klein four-group) flows.

Group elements are encoded as ints ``2*a + b`` for the pair ``(a, b)``, so
addition is XOR and every element is its own inverse:

    ZERO = (0,0) = 0,  E01 = (0,1) = 1,  E10 = (1,0) = 2,  E11 = (1,1) = 3

Orientation is irrelevant for this group, so a flow is just a map from edge ids
to elements whose XOR over the incidences of every vertex vanishes (a loop is
incident twice and therefore never matters).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import _kernels
from .graphcore import (
    EdgeId,
    EdgeSet,
    GraphError,
    Multigraph,
    VertexId,
    check_edges,
    circuit_order,
    edge_components,
    find_cycle_within,
    is_even_subgraph,
    spanning_forest,
    subset_degrees,
    thread_weights,
    tree_path,
)

ZERO, E01, E10, E11 = 0, 1, 2, 3
NONZERO = (E01, E10, E11)
GOOD = frozenset((ZERO, E11))

Flow = Dict[EdgeId, int]


class FlowError(ValueError):
    """A flow argument violates conservation or does not match its graph."""


class NoNowhereZeroFlow(RuntimeError):
    def __init__(self, msg: str = "no nowhere-zero 4-flow"):
        super().__init__(msg)


class LemmaPreconditionError(ValueError):
    pass


class InternalError(RuntimeError):
    """A guarantee that should hold by construction failed."""


def as_pair(x: int) -> Tuple[int, int]:
    return (x >> 1) & 1, x & 1


def from_pair(a: int, b: int) -> int:
    return 2 * (a & 1) + (b & 1)


def swap(x: int) -> int:
    """Automorphism exchanging the two coordinates: (0,1) <-> (1,0)."""
    return ((x & 1) << 1) | ((x >> 1) & 1)


# --------------------------------------------------------------- exact q values


@dataclass(frozen=True)
class LogQ:
    """The real number ``coef * log2(arg)``, compared exactly against integers."""

    coef: int
    arg: int

    def __float__(self) -> float:
        import math
        return self.coef * math.log2(self.arg)


QValue = Union[int, Fraction, LogQ]


def _cmp_logq(q: LogQ, K: Fraction) -> int:
    """Sign of ``q - K`` for ``q = coef * log2(arg)`` (coef >= 0, arg >= 1)."""
    if q.arg <= 1 or q.coef == 0:
        return (0 > K) - (0 < K)
    if q.arg & (q.arg - 1) == 0:  # power of two: q is the integer coef * k
        v = q.coef * (q.arg.bit_length() - 1)
        return (v > K) - (v < K)
    if K <= 0:
        return 1
    # log2(arg) is irrational here, so q != K; decide without huge powers when possible
    p, s = K.numerator, K.denominator
    if q.coef * s <= 4096:
        return 1 if q.arg ** (q.coef * s) > (1 << p) else -1
    with localcontext() as ctx:
        ctx.prec = 80 + len(str(p)) + len(str(s))
        val = Decimal(q.coef) * Decimal(q.arg).ln() / Decimal(2).ln()
        return 1 if val * s > p else -1


def q_le(q: QValue, K) -> bool:
    """Exact test ``q <= K`` for an integer or rational ``K``."""
    if not isinstance(q, LogQ):
        if type(q) is int and type(K) is int:
            return q <= K
        return Fraction(q) <= Fraction(K)
    return _cmp_logq(q, Fraction(K)) <= 0


def q_ge(q: QValue, K) -> bool:
    """Exact test ``q >= K``."""
    if not isinstance(q, LogQ):
        return Fraction(q) >= Fraction(K)
    return _cmp_logq(q, Fraction(K)) >= 0


# ------------------------------------------------------------------ basic ops


def check_flow(G: Multigraph, f: Mapping[EdgeId, int]) -> bool:
    """True iff ``f`` conserves at every vertex.  Every edge must carry a value."""
    missing = G.edges.keys() - f.keys()
    if missing:
        raise FlowError(f"flow has no value on edges {sorted(missing)[:10]}")
    for v, inc in G.incidence.items():
        acc = 0
        for eid in inc:
            acc ^= f[eid]
        if acc:
            return False
    return True


def zero_flow(G: Multigraph) -> Flow:
    return {e: ZERO for e in G.edges}


def support(f: Mapping[EdgeId, int]) -> EdgeSet:
    return frozenset(e for e, x in f.items() if x)


def edges_valued(f: Mapping[EdgeId, int], a: int, within: Optional[Iterable[EdgeId]] = None) -> EdgeSet:
    """``E_{f=a}`` restricted to ``within`` (default: all edges of ``f``)."""
    keys = f.keys() if within is None else within
    return frozenset(e for e in keys if f[e] == a)


def weighted_count(G: Multigraph, f: Mapping[EdgeId, int], a: int, within: Iterable[EdgeId]) -> int:
    return sum(G.edges[e].weight for e in within if f[e] == a)


def add_cycle_flow(G: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId], a: int) -> Flow:
    """``f + f_{C,a}``: add the constant ``a`` on the even subgraph ``C``."""
    C = check_edges(G, C)
    if not is_even_subgraph(G, C):
        raise GraphError("cycle flow requested on a non-even edge set")
    g = dict(f)
    if a:
        for e in C:
            g[e] ^= a
    return g


def permute_values(f: Mapping[EdgeId, int], perm: Sequence[int]) -> Flow:
    """Apply a group automorphism given as the images of (E01, E10); E11 maps to their sum."""
    table = [0, perm[0], perm[1], perm[0] ^ perm[1]]
    return {e: table[x] for e, x in f.items()}


def solve_forest(G: Multigraph, forest: Iterable[EdgeId], f: Mapping[EdgeId, int]) -> Flow:
    """Fill in values on the forest edges so that every vertex conserves.

    All non-forest edges must already carry values in ``f``.  Each tree is
    solved leaf to root; a nonzero leftover at a root means the fixed values
    cannot be completed and raises :class:`InternalError`.
    """
    forest = list(forest)
    fset = set(forest)
    g = {e: x for e, x in f.items() if e not in fset}
    adj: Dict[VertexId, List[Tuple[VertexId, EdgeId]]] = {}
    for eid in forest:
        e = G.edges[eid]
        if e.is_loop:
            raise GraphError("forest contains a loop")
        adj.setdefault(e.u, []).append((e.v, eid))
        adj.setdefault(e.v, []).append((e.u, eid))
    seen = set()
    for root in sorted(adj):
        if root in seen:
            continue
        seen.add(root)
        order, parent_edge = [root], {root: None}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w, eid in adj[v]:
                if w not in seen:
                    seen.add(w)
                    parent_edge[w] = eid
                    order.append(w)
                    queue.append(w)
        for v in reversed(order):
            acc = 0
            for eid in G.incidence[v]:
                if eid == parent_edge[v]:
                    continue
                acc ^= g[eid]
            if parent_edge[v] is None:
                if acc:
                    raise InternalError(f"conservation deficit {acc} left at root {v}")
            else:
                g[parent_edge[v]] = acc
    return g


# ----------------------------------------------------------- nowhere-zero search


def _nz_search_setup(G: Multigraph):
    tree = spanning_forest(G)
    tree_set = set(tree)
    cotree = [e for e in G.sorted_edges if e not in tree_set]
    member: Dict[EdgeId, List[int]] = {e: [] for e in tree}
    for i, c in enumerate(cotree):
        e = G.edges[c]
        if not e.is_loop:
            for t in tree_path(G, tree, e.u, e.v):
                member[t].append(i)
    if any(not lst for lst in member.values()):
        raise GraphError("graph has a bridge; no nowhere-zero flow can exist")
    # greedy cotree order: close as many tree constraints as early as possible
    remaining = {t: set(lst) for t, lst in member.items()}
    order: List[int] = []
    placed = set()
    while len(order) < len(cotree):
        best, best_key = None, None
        for i in range(len(cotree)):
            if i in placed:
                continue
            closes = sum(1 for s in remaining.values() if s and s <= placed | {i})
            touches = sum(1 for s in remaining.values() if i in s)
            key = (closes, touches, -i)
            if best_key is None or key > best_key:
                best, best_key = i, key
        order.append(best)
        placed.add(best)
    pos = {c: k for k, c in enumerate(order)}
    level_masks: List[List[int]] = [[] for _ in cotree]
    tree_masks: Dict[EdgeId, int] = {}
    for t, lst in member.items():
        mask = 0
        for i in lst:
            mask |= 1 << pos[i]
        tree_masks[t] = mask
        level_masks[mask.bit_length() - 1].append(mask)
    cot_by_level = [cotree[i] for i in order]
    return cot_by_level, tree_masks, level_masks


def nowhere_zero_flows(Gc: Multigraph, limit: int = 1) -> List[Flow]:
    """Up to ``limit`` distinct nowhere-zero Z2xZ2 flows of ``Gc``.

    Backtracks over a cycle-space basis: each cotree edge picks one of the three
    nonzero values (the pair of coordinates selects its membership in the two
    even subgraphs of the flow), tree edges are then forced and must be nonzero.
    """
    if not Gc.edges:
        return [{}]
    cot, tree_masks, level_masks = _nz_search_setup(Gc)
    sols = _kernels.nz4_search(level_masks, len(cot), max_solutions=limit)
    flows = []
    for x, y in sols:
        f: Flow = {}
        for lvl, c in enumerate(cot):
            f[c] = from_pair((x >> lvl) & 1, (y >> lvl) & 1)
        for t, m in tree_masks.items():
            f[t] = from_pair((x & m).bit_count() & 1, (y & m).bit_count() & 1)
        flows.append(f)
    return flows


def nowhere_zero_flow(Gc: Multigraph) -> Flow:
    """A nowhere-zero Z2xZ2 flow, or :class:`NoNowhereZeroFlow` after exhaustive search."""
    try:
        flows = nowhere_zero_flows(Gc, 1)
    except GraphError as exc:
        raise NoNowhereZeroFlow(f"no nowhere-zero 4-flow ({exc})") from exc
    if not flows:
        raise NoNowhereZeroFlow()
    return flows[0]


def extend_flow_over_F(G: Multigraph, F: Iterable[EdgeId], g: Mapping[EdgeId, int]) -> Flow:
    """Extend a flow of ``G/F`` (same edge ids off ``F``) to a flow of ``G``."""
    F = check_edges(G, F)
    off = G.edges.keys() - F
    missing = off - g.keys()
    if missing:
        raise FlowError(f"flow on G/F misses edges {sorted(missing)[:10]}")
    tree = spanning_forest(G, F)
    base = {e: g[e] for e in off}
    for e in F.difference(tree):
        base[e] = ZERO
    return solve_forest(G, tree, base)


# ------------------------------------------------------------- the lemma


@dataclass
class SegmentReport:
    circuit: List[EdgeId]
    start: int
    length: int
    weighted_length: int


def max_good_segment(f: Mapping[EdgeId, int], C: Sequence[EdgeId],
                     weights: Optional[Mapping[EdgeId, int]] = None) -> SegmentReport:
    """Longest cyclic run of edges of ``C`` (in the given order) valued in {(0,0),(1,1)}.

    Ties go to the run that starts first.
    """
    C = list(C)
    p = len(C)
    w = (lambda e: 1) if weights is None else (lambda e: weights[e])
    good = [f[e] in GOOD for e in C]
    if all(good):
        return SegmentReport(C, 0, p, sum(w(e) for e in C))
    if not any(good):
        return SegmentReport(C, 0, 0, 0)
    best_start, best_len = 0, 0
    first_bad = good.index(False)
    i = 0
    while i < p:
        k = (first_bad + 1 + i) % p
        if good[k]:
            run = 0
            while good[(k + run) % p]:
                run += 1
            if run > best_len or (run == best_len and k < best_start):
                best_start, best_len = k, run
            i += run
        else:
            i += 1
    seg_w = sum(w(C[(best_start + j) % p]) for j in range(best_len))
    return SegmentReport(C, best_start, best_len, seg_w)


@dataclass
class LemmaTrace:
    iterations: int = 0
    branches: List[str] = field(default_factory=list)
    zero_before: int = 0
    zero_after: int = 0


def _zero_weight(G: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId]) -> int:
    return sum(G.edges[e].weight for e in C if f[e] == ZERO)


def meets_lemma_bound(G: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId], q: QValue) -> bool:
    """Weighted ``|E_{f=0}(C)| <= (w(C) - q) / 4``, evaluated exactly."""
    C = list(C)
    wC = sum(G.edges[e].weight for e in C)
    return q_le(q, wC - 4 * _zero_weight(G, f, C))


def _a_path(G: Multigraph, A: EdgeSet, start: VertexId) -> Tuple[List[EdgeId], VertexId]:
    """Shortest path inside ``A`` from ``start`` to another vertex of odd ``A``-degree."""
    deg = subset_degrees(G, A)
    adj: Dict[VertexId, List[Tuple[VertexId, EdgeId]]] = {}
    for eid in sorted(A):
        e = G.edges[eid]
        if e.is_loop:
            continue
        adj.setdefault(e.u, []).append((e.v, eid))
        adj.setdefault(e.v, []).append((e.u, eid))
    prev: Dict[VertexId, Tuple[VertexId, EdgeId]] = {start: (start, -1)}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if v != start and deg.get(v, 0) % 2:
            path = []
            x = v
            while x != start:
                x, eid = prev[x]
                path.append(eid)
            path.reverse()
            return path, v
        for w, eid in adj.get(v, ()):
            if w not in prev:
                prev[w] = (v, eid)
                queue.append(w)
    raise InternalError("odd vertex of A has no odd partner in its component")


def lemma_transform_traced(Gh: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId],
                           q: QValue = 1, check_threads: bool = True) -> Tuple[Flow, LemmaTrace]:
    C = check_edges(Gh, C)
    try:
        order_e, order_v = circuit_order(Gh, C)
    except GraphError:
        raise GraphError("lemma_transform needs a circuit") from None
    if check_threads:
        tw = thread_weights(Gh)
        short = [e for e in C if not q_le(q, tw[e])]
        if short:
            raise LemmaPreconditionError(f"edges {sorted(short)[:5]} lie in threads shorter than q")
    p = len(order_e)
    weights = {e: Gh.edges[e].weight for e in C}
    wC = sum(weights.values())
    trace = LemmaTrace(zero_before=_zero_weight(Gh, f, C))
    g = dict(f)
    swapped = False

    def done(h: Flow) -> Tuple[Flow, LemmaTrace]:
        if swapped:
            h = {e: swap(x) for e, x in h.items()}
        if not q_le(q, wC - 4 * _zero_weight(Gh, h, C)):
            raise InternalError("lemma bound not reached")
        trace.zero_after = _zero_weight(Gh, h, C)
        return h, trace

    if q_le(q, wC - 4 * trace.zero_before):
        trace.branches.append("already")
        return done(g)
    pos_v = {v: i for i, v in enumerate(order_v)}
    while True:
        trace.iterations += 1
        if trace.iterations > p + 1:
            raise InternalError("segment growth did not terminate")
        seg = max_good_segment(g, order_e, weights)
        if seg.length == p:
            trace.branches.append("whole")
            return done(add_cycle_flow(Gh, g, C, E01))
        a, s = seg.start, seg.length
        ea, eprev = order_e[a], order_e[a - 1]
        if g[ea] == E11:
            g = add_cycle_flow(Gh, g, C, E11)
        if g[eprev] == E01:
            g = {e: swap(x) for e, x in g.items()}
            swapped = not swapped
        if g[ea] != ZERO or g[eprev] != E10:
            raise InternalError("segment normalisation failed")
        v1 = order_v[a]
        A = frozenset(e for e, x in g.items() if x in (E10, E11)) - C
        P, vt = _a_path(Gh, A, v1)
        j = (pos_v[vt] - a) % p
        Pp = [order_e[(a + i) % p] for i in range(j)]
        if j >= s:
            trace.branches.append("grow")
            C2 = (C - frozenset(Pp)) | frozenset(P)
            g = add_cycle_flow(Gh, g, C2, E01)
            continue
        C1 = frozenset(P) | frozenset(Pp)
        g1 = add_cycle_flow(Gh, g, C1, E01)
        if q_le(q, wC - 4 * _zero_weight(Gh, g1, C)):
            trace.branches.append("flip")
            return done(g1)
        counts = {b: weighted_count(Gh, g, b, C) for b in NONZERO}
        b = min(NONZERO, key=lambda x: (counts[x], x))
        trace.branches.append(f"shift{b}")
        return done(add_cycle_flow(Gh, g, C, b))


def lemma_transform(Gh: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId], q: QValue = 1) -> Flow:
    """Re-route ``f`` on circuit ``C`` so few edges of ``C`` carry zero.

    Returns a flow ``g`` with the same support as ``f`` off ``C`` and weighted
    ``|E_{g=0}(C)| <= (w(C) - q) / 4``.  Every edge of ``C`` must lie in a
    thread of weighted length at least ``q``.
    """
    return lemma_transform_traced(Gh, f, C, q)[0]


def apply_lemma_all_components(Gh: Multigraph, f: Mapping[EdgeId, int], components: Sequence[Iterable[EdgeId]],
                               q: Union[QValue, Sequence[QValue]] = 1, max_passes: int = 3) -> Flow:
    comps = [frozenset(c) for c in components]
    qs = list(q) if isinstance(q, (list, tuple)) else [q] * len(comps)
    g = dict(f)
    for _ in range(max_passes):
        for B, qb in zip(comps, qs):
            if not meets_lemma_bound(Gh, g, B, qb):
                g = lemma_transform(Gh, g, B, qb)
        if all(meets_lemma_bound(Gh, g, B, qb) for B, qb in zip(comps, qs)):
            return g
    bad = [min(B) for B, qb in zip(comps, qs) if not meets_lemma_bound(Gh, g, B, qb)]
    raise InternalError(f"lemma bound not stable on components {bad}")


# ------------------------------------------------------------- refinement


def refine_q(G: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId], m: int) -> Tuple[Flow, bool]:
    """Run the circuit transform with the larger thread-length bonus when possible.

    Returns ``(flow, applied)``; when no threshold index exists the input comes
    back unchanged with ``applied=False``.
    """
    from .reduce import RefinementInapplicable, contract_short_threads

    C = check_edges(G, C)
    try:
        Gc, q, S = contract_short_threads(G, C, m)
    except RefinementInapplicable:
        return dict(f), False
    Cc = C - S
    fc = {e: x for e, x in f.items() if e not in S}
    gc = lemma_transform(Gc, fc, Cc, q)
    g = solve_forest(G, sorted(S), gc)
    if not check_flow(G, g):
        raise InternalError("lifted refinement flow does not conserve")
    return g, True


def refined_bound_holds(G: Multigraph, f: Mapping[EdgeId, int], C: Iterable[EdgeId], m: int) -> bool:
    """Weighted ``|E_{f=0}(C)| <= w(C)/4 - (5/4) log2 m``."""
    C = list(C)
    wC = sum(G.edges[e].weight for e in C)
    return q_le(LogQ(5, m), wC - 4 * _zero_weight(G, f, C))


# ------------------------------------------------------------- decycling


def decycle_offF(G: Multigraph, f: Mapping[EdgeId, int], F: Iterable[EdgeId]) -> Flow:
    """Make the (0,1)- and (1,0)-classes off ``F`` acyclic without touching ``F``.

    A circuit of (0,1) edges becomes (1,1) by adding (1,0) along it; then a
    circuit of (1,0) edges becomes (1,1) by adding (0,1).  The second phase
    never creates (0,1) edges, so both classes end acyclic.
    """
    F = check_edges(G, F)
    g = dict(f)
    for cls, add in ((E01, E10), (E10, E01)):
        while True:
            S = [e for e in G.sorted_edges if e not in F and g[e] == cls]
            cyc = find_cycle_within(G, S)
            if cyc is None:
                break
            for e in cyc:
                g[e] ^= add
    return g


def f_components(G: Multigraph, F: Iterable[EdgeId]) -> List[EdgeSet]:
    return edge_components(G, F)
