"""Cycle covers built from a Z2xZ2 flow, cover verification and the exact oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from . import _kernels
from .flows import E01, E10, E11, ZERO, InternalError
from .graphcore import (
    EdgeId,
    EdgeSet,
    Multigraph,
    check_edges,
    cycle_space_basis,
    cycle_space_dimension,
    find_bridges,
    is_even_subgraph,
    weight,
)

ORACLE_MAX_DIM = 16


class OracleRefused(ValueError):
    pass


@dataclass
class CycleCover:
    host: Multigraph
    cycles: List[EdgeSet]

    @property
    def length(self) -> int:
        return sum(weight(self.host, c) for c in self.cycles)


@dataclass
class CoverCheck:
    valid: bool
    length: int
    multiplicity: Dict[EdgeId, int]
    uncovered: List[EdgeId] = field(default_factory=list)
    odd_members: List[int] = field(default_factory=list)


def verify_cover(G: Multigraph, cycles: Sequence[Iterable[EdgeId]]) -> CoverCheck:
    mult = {e: 0 for e in G.edges}
    odd, length = [], 0
    for i, c in enumerate(cycles):
        c = check_edges(G, c)
        if not is_even_subgraph(G, c):
            odd.append(i)
        for e in c:
            mult[e] += 1
        length += weight(G, c)
    uncovered = sorted(e for e, k in mult.items() if k == 0 and G.edges[e].weight)
    return CoverCheck(not uncovered and not odd, length, mult, uncovered, odd)


def class_cycles(f: Mapping[EdgeId, int]) -> Tuple[EdgeSet, EdgeSet, EdgeSet]:
    """The three even subgraphs {01,10}, {01,11}, {11,10}; together a double cover of supp(f)."""
    c1 = frozenset(e for e, x in f.items() if x in (E01, E10))
    c2 = frozenset(e for e, x in f.items() if x in (E01, E11))
    c3 = frozenset(e for e, x in f.items() if x in (E11, E10))
    return c1, c2, c3


def balance_C2(G: Multigraph, C2: Iterable[EdgeId], components: Sequence[Iterable[EdgeId]]) -> EdgeSet:
    """Replace ``C2`` by ``C2 Δ B`` for each component ``B`` it covers more than half of."""
    out = frozenset(C2)
    for B in components:
        B = frozenset(B)
        if 2 * weight(G, out & B) > weight(G, B):
            out = out ^ B
    return out


def _require_cover(G: Multigraph, cycles: Sequence[EdgeSet], what: str) -> CycleCover:
    chk = verify_cover(G, cycles)
    if not chk.valid:
        raise InternalError(f"{what} is not a cycle cover: uncovered={chk.uncovered[:10]} odd={chk.odd_members}")
    return CycleCover(G, list(cycles))


def build_cover1(G: Multigraph, f: Mapping[EdgeId, int], F: Iterable[EdgeId]) -> CycleCover:
    F = check_edges(G, F)
    c1, c2, c3 = class_cycles(f)
    cover = _require_cover(G, [c1 ^ F, c2 ^ F, c3 ^ F], "cover 1")
    zeros = [e for e in G.edges if f[e] == ZERO]
    expected = 2 * G.total_weight - weight(G, F) + 2 * weight(G, zeros)
    if cover.length != expected:
        raise InternalError(f"cover 1 length {cover.length} != 2m - |F| + 2|E0| = {expected}")
    return cover


def build_cover2(G: Multigraph, f: Mapping[EdgeId, int], F: Iterable[EdgeId], C2: Iterable[EdgeId] = None) -> CycleCover:
    """{C1, C2, C1 Δ F}; pass the balanced ``C2`` (defaults to the raw class cycle)."""
    F = check_edges(G, F)
    c1, raw_c2, _ = class_cycles(f)
    C2 = raw_c2 if C2 is None else frozenset(C2)
    cover = _require_cover(G, [c1, C2, c1 ^ F], "cover 2")
    expected = 2 * weight(G, c1 - F) + weight(G, C2) + weight(G, F)
    if cover.length != expected:
        raise InternalError(f"cover 2 length {cover.length} != 2|C1-F| + |C2| + |F| = {expected}")
    return cover


def multiplicity_law_holds(G: Multigraph, f: Mapping[EdgeId, int], F: Iterable[EdgeId], cover: CycleCover) -> bool:
    """In cover 1 an edge is covered 3x iff f=0, 2x iff off F, 1x iff on F with f != 0."""
    F = frozenset(F)
    mult = verify_cover(G, cover.cycles).multiplicity
    for e in G.edges:
        if f[e] == ZERO:
            want = 3
        elif e in F:
            want = 1
        else:
            want = 2
        if mult[e] != want:
            return False
    return True


# ------------------------------------------------------------------ oracle


def _edge_groups(G: Multigraph) -> Tuple[List[EdgeSet], List[int], List[int]]:
    """Basis, and the weighted edges grouped by their basis signature.

    Edges with equal signatures lie in exactly the same even subgraphs, so a
    cover never separates them.  Returns ``(basis, signatures, group weights)``.
    """
    basis = cycle_space_basis(G)
    sig: Dict[EdgeId, int] = {e: 0 for e in G.edges}
    for i, b in enumerate(basis):
        for e in b:
            sig[e] |= 1 << i
    groups: Dict[int, int] = {}
    for e in G.sorted_edges:
        if G.edges[e].weight:
            groups[sig[e]] = groups.get(sig[e], 0) + G.edges[e].weight
    keys = sorted(groups)
    return basis, keys, [groups[k] for k in keys]


def _variable_order(sigs: Sequence[int], weights: Sequence[int], nvars: int) -> List[int]:
    """Greedy basis order that settles as much group weight as early as possible."""
    chosen: List[int] = []
    mask = 0
    left = set(range(nvars))
    while left:
        def gain(i):
            m = mask | 1 << i
            return sum(w for s, w in zip(sigs, weights) if s & m == s and s & (1 << i)), -i
        i = max(left, key=gain)
        chosen.append(i)
        mask |= 1 << i
        left.remove(i)
    return chosen


def _check_oracle_input(G: Multigraph) -> int:
    if find_bridges(G):
        raise OracleRefused("graph has bridges; no cycle cover exists")
    dim = cycle_space_dimension(G)
    if dim > ORACLE_MAX_DIM:
        raise OracleRefused(f"cycle space dimension {dim} exceeds {ORACLE_MAX_DIM}")
    return dim


def exact_cc_oracle(G: Multigraph, max_members: int = 4, upper_bound: int = None,
                    method: str = "labels") -> int:
    """Minimum length of a cover of ``G`` by at most ``max_members`` even subgraphs.

    ``method="labels"`` (default) searches the covers directly as tuples of
    even subgraphs: each basis vector of the cycle space gets a value in
    ``Z2^max_members`` whose bit ``j`` says whether member ``j`` uses it, every
    weighted edge must end up in some member, and the branch and bound prunes
    on the exact length so far plus one per undecided edge.
    ``method="setcover"`` enumerates all ``2^dim`` even subgraphs and runs a
    set-cover branch and bound over them; both are exact and must agree.
    """
    _check_oracle_input(G)
    if method == "setcover":
        return _setcover_oracle(G, max_members, upper_bound)
    if method != "labels":
        raise ValueError(f"unknown oracle method {method!r}")
    basis, sigs, gw = _edge_groups(G)
    if not gw:
        return 0
    nvars = len(basis)
    perm = _variable_order(sigs, gw, nvars)
    where = {old: new for new, old in enumerate(perm)}
    remapped = []
    for s, w in zip(sigs, gw):
        t = 0
        for i in range(nvars):
            if s >> i & 1:
                t |= 1 << where[i]
        remapped.append((t, w))
    limit = max_members * sum(gw) + 1
    best0 = upper_bound + 1 if upper_bound is not None else limit
    best = _kernels.label_bnb(remapped, nvars, max_members, best0)
    if best >= best0:
        if upper_bound is not None:
            return exact_cc_oracle(G, max_members)
        raise InternalError("oracle found no cover")
    return best


def _setcover_oracle(G: Multigraph, max_members: int, upper_bound: int = None) -> int:
    basis, keys, gw = _edge_groups(G)
    if not gw:
        return 0
    # basis vectors re-expressed over groups (weight-0 edges only ride along)
    gbasis = []
    for i in range(len(basis)):
        mask = 0
        for j, k in enumerate(keys):
            if k >> i & 1:
                mask |= 1 << j
        gbasis.append(mask)
    masks = [x for x in set(_kernels.even_masks(gbasis)) if x]
    wts = {x: sum(gw[j] for j in range(len(gw)) if x >> j & 1) for x in masks}
    masks.sort(key=lambda x: (wts[x], x))
    full = (1 << len(gw)) - 1
    best0 = upper_bound + 1 if upper_bound is not None else max_members * sum(gw) + 1
    best = _kernels.cover_bnb(masks, [wts[x] for x in masks], gw, full, max_members, best0)
    if best >= best0:
        if upper_bound is not None:
            return _setcover_oracle(G, max_members)
        raise InternalError("oracle found no cover")
    return best
