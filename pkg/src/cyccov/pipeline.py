"""End-to-end construction of a short cycle cover and its report."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cover import (
    CycleCover,
    OracleRefused,
    balance_C2,
    build_cover1,
    build_cover2,
    class_cycles,
    exact_cc_oracle,
    multiplicity_law_holds,
    verify_cover,
)
from .flows import (
    LogQ,
    NoNowhereZeroFlow,
    InternalError,
    check_flow,
    decycle_offF,
    extend_flow_over_F,
    lemma_transform_traced,
    meets_lemma_bound,
    nowhere_zero_flows,
    q_ge,
    refine_q,
    refined_bound_holds,
    support,
)
from .graphcore import (
    EdgeId,
    EdgeSet,
    GraphError,
    Multigraph,
    connected_components,
    contract_edges,
    edge_components,
    find_bridges,
    is_circuit,
    is_circuit_component,
    weight,
)
from .matching import DEFAULT_LIMIT, FSelection, iter_F
from .reduce import SplitGraph, lift_flow, split_to_subcubic, strip_loops, suppress_threads

log = logging.getLogger(__name__)


@dataclass
class Recorder:
    """Intermediate objects captured while :func:`record` is active (for audits and tests).

    ``lemma`` holds ``(host, flow_in, circuit, flow_out, trace)`` per circuit
    transform; ``flows`` holds ``(stage, host, flow)`` for every flow built.
    """

    lemma: List[tuple] = field(default_factory=list)
    flows: List[tuple] = field(default_factory=list)
    attempts: List[tuple] = field(default_factory=list)


_recorders: List[Recorder] = []


@contextmanager
def record():
    rec = Recorder()
    _recorders.append(rec)
    try:
        yield rec
    finally:
        _recorders.remove(rec)


def _note(kind: str, *item) -> None:
    for rec in _recorders:
        getattr(rec, kind).append(item)


class BridgeError(GraphError):
    def __init__(self, bridges: Sequence[EdgeId]):
        self.bridges = sorted(bridges)
        super().__init__(f"graph has bridges: {self.bridges}")


@dataclass
class SolveOptions:
    refine_q: bool = False
    oracle: bool = False
    matching_limit: int = DEFAULT_LIMIT
    seed: int = 0
    flow_alternatives: int = 8
    max_attempts: int = 64


def theorem_bound(m: int, n2: int) -> Fraction:
    return Fraction(29 * m + n2, 18) - Fraction(1, 2)


def count_degree2(G: Multigraph, vertices=None) -> int:
    vs = G.vertices if vertices is None else vertices
    return sum(1 for v in vs if len(G.incidence[v]) == 2)


@dataclass
class Attempt:
    cycles1: List[EdgeSet]
    cycles2: List[EdgeSet]
    len_c1: int
    len_c2: int
    f_size: int
    d1: int
    zero_counts: List[Tuple[int, int]]
    lemma_iterations: List[Tuple[int, int]]
    refined: int
    flow: Dict[EdgeId, int]
    F: EdgeSet

    @property
    def chosen(self) -> int:
        return min(self.len_c1, self.len_c2)

    @property
    def cycles(self) -> List[EdgeSet]:
        return self.cycles1 if self.len_c1 <= self.len_c2 else self.cycles2


@dataclass
class ComponentResult:
    kind: str
    m: int
    n2: int
    loops: int
    cycles: List[EdgeSet]
    len_c1: int
    len_c2: int
    f_size: int = 0
    d1: int = 0
    zero_counts: List[Tuple[int, int]] = field(default_factory=list)
    lemma_iterations: List[Tuple[int, int]] = field(default_factory=list)
    refined: int = 0
    retries: int = 0
    no_flow_skips: int = 0
    target: Fraction = Fraction(0)
    target_met: bool = True
    n2_original: int = 0

    @property
    def chosen(self) -> int:
        return min(self.len_c1, self.len_c2)


def _seed_rank(Hbar: Multigraph, seed: int) -> Dict[EdgeId, int]:
    edges = Hbar.sorted_edges
    if not seed:
        return {e: i for i, e in enumerate(edges)}
    perm = np.random.default_rng(seed).permutation(len(edges))
    return {e: int(perm[i]) for i, e in enumerate(edges)}


def cover_from_flow(G: Multigraph, split: SplitGraph, sel: FSelection, g: Dict[EdgeId, int],
                    refine: bool = False) -> Attempt:
    """Turn a nowhere-zero flow of G/F into the two candidate covers."""
    F = sel.F
    m = G.total_weight
    f = extend_flow_over_F(G, F, g)
    _note("flows", "extended", G, f)
    if not check_flow(G, f) or (G.edges.keys() - F) - support(f):
        raise InternalError("extended flow is invalid or vanishes off F")
    # lemma host: the split graph with F's weight-0 edges contracted, where every
    # component of F is a genuine circuit of weight-1 edges
    fz = sel.FH & split.zero_edges
    Gl, _ = contract_edges(split.H, fz)
    fl = lift_flow(Gl, split.zero_edges - fz, f)
    _note("flows", "lifted", Gl, fl)
    circuits = edge_components(Gl, sel.FH - fz)
    g_components = edge_components(G, F)
    iters, refined = [], 0
    for C in circuits:
        if not is_circuit(Gl, C):
            raise InternalError("F component is not a circuit at the lemma level")
        done = False
        if refine and C in g_components and is_circuit(G, C) and q_ge(LogQ(weight(G, C), m), 14 * m):
            fl2, applied = refine_q(Gl, fl, C, m)
            if applied:
                if not refined_bound_holds(Gl, fl2, C, m):
                    raise InternalError("refined bound not reached")
                fl, done = fl2, True
                refined += 1
        if not done:
            fin = fl
            fl, trace = lemma_transform_traced(Gl, fl, C, 1)
            _note("lemma", Gl, fin, C, fl, trace)
            iters.append((len(C), trace.iterations))
    if not all(meets_lemma_bound(Gl, fl, C, 1) for C in circuits):
        raise InternalError("a later circuit transform disturbed an earlier circuit")
    fG = {e: fl[e] for e in G.edges}
    if not check_flow(G, fG):
        raise InternalError("projected flow does not conserve")
    fG = decycle_offF(G, fG, F)
    _note("flows", "final", G, fG)
    zero_counts = []
    for B in g_components:
        zc = sum(G.edges[e].weight for e in B if fG[e] == 0)
        wB = weight(G, B)
        if not 4 * zc < wB:
            raise InternalError(f"zero count {zc} on an F component of weight {wB}")
        zero_counts.append((wB, zc))
    c1, c2, c3 = class_cycles(fG)
    c2b = balance_C2(G, c2, g_components)
    cov1 = build_cover1(G, fG, F)
    if not multiplicity_law_holds(G, fG, F, cov1):
        raise InternalError("cover 1 multiplicity law failed")
    cov2 = build_cover2(G, fG, F, c2b)
    on_f = {v for e in F for v in (G.edges[e].u, G.edges[e].v)}
    d1 = sum(1 for v in G.vertices if len(G.incidence[v]) == 2 and v not in on_f)
    att = Attempt(cov1.cycles, cov2.cycles, cov1.length, cov2.length, weight(G, F), d1,
                  zero_counts, iters, refined, fG, F)
    _note("attempts", G, att)
    return att


def solve_component(G: Multigraph, opts: SolveOptions) -> ComponentResult:
    """Cover a connected, loopless, bridgeless graph that is not a circuit."""
    m = G.total_weight
    n2 = count_degree2(G)
    target = theorem_bound(m, n2)
    split = split_to_subcubic(G)
    supp = suppress_threads(split.H)
    rank = _seed_rank(supp.Hbar, opts.seed)
    best: Optional[Attempt] = None
    attempts = 0
    no_flow = 0
    pending: List[Tuple[FSelection, List[Dict[EdgeId, int]]]] = []

    def consider(att: Attempt) -> bool:
        nonlocal best
        if best is None or att.chosen < best.chosen:
            best = att
        return att.chosen <= target

    # rung 1: successive matchings with their first flow; rung 2: alternative flows
    for sel in iter_F(split, supp, opts.matching_limit, rank):
        if sel.F == frozenset(G.edges):
            flows = [{}]
        else:
            GF, _ = contract_edges(G, sel.F)
            flows = nowhere_zero_flows(GF, opts.flow_alternatives)
            for g in flows:
                _note("flows", "nowhere-zero", GF, g)
        if not flows:
            no_flow += 1
            if no_flow + attempts >= opts.max_attempts and best is not None:
                break
            continue
        attempts += 1
        if consider(cover_from_flow(G, split, sel, flows[0], opts.refine_q)):
            break
        pending.append((sel, flows[1:]))
        if attempts >= opts.max_attempts:
            break
    if best is None or best.chosen > target:
        for sel, rest in pending:
            hit = False
            for g in rest:
                attempts += 1
                if consider(cover_from_flow(G, split, sel, g, opts.refine_q)):
                    hit = True
                    break
            if hit:
                break
    if best is None:
        raise NoNowhereZeroFlow("no candidate F admits a nowhere-zero 4-flow on G/F")
    return ComponentResult(
        kind="pipeline", m=m, n2=n2, loops=0, cycles=best.cycles,
        len_c1=best.len_c1, len_c2=best.len_c2, f_size=best.f_size, d1=best.d1,
        zero_counts=best.zero_counts, lemma_iterations=best.lemma_iterations, refined=best.refined,
        retries=attempts - 1, no_flow_skips=no_flow, target=target, target_met=best.chosen <= target,
    )


@dataclass
class SolveResult:
    graph: Multigraph
    cover: CycleCover
    components: List[ComponentResult]
    loops: List[EdgeId]
    m: int
    n2: int
    bound: Fraction
    valid: bool
    oracle_cc: Optional[int] = None
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def chosen(self) -> int:
        return self.cover.length

    @property
    def violations(self) -> List[str]:
        out = []
        if self.m and self.chosen > self.bound:
            out.append(f"global: {self.chosen} > {self.bound}")
        for i, c in enumerate(self.components):
            if c.m + c.loops and c.chosen + c.loops > theorem_bound(c.m + c.loops, c.n2_original):
                out.append(f"component {i}: {c.chosen + c.loops} > {theorem_bound(c.m + c.loops, c.n2_original)}")
            if not c.target_met:
                out.append(f"component {i}: {c.chosen} > core bound {c.target}")
        return out

    @property
    def bound_ok(self) -> bool:
        return not self.violations

    def report(self, with_cover: bool = True) -> dict:
        pipeline = [c for c in self.components if c.kind == "pipeline"]
        rep = {
            "m": self.m,
            "n2": self.n2,
            "f_size": sum(c.f_size for c in self.components),
            "len_c1": sum(c.len_c1 for c in self.components),
            "len_c2": sum(c.len_c2 for c in self.components),
            "loops": len(self.loops),
            "chosen": self.chosen,
            "bound": float(self.bound),
            "bound_exact": str(self.bound),
            "retries": sum(c.retries for c in pipeline),
            "valid": self.valid,
            "bound_ok": self.bound_ok,
            "violations": self.violations,
            "components": [
                {
                    "kind": c.kind, "m": c.m, "n2": c.n2, "loops": c.loops, "f_size": c.f_size, "d1": c.d1,
                    "len_c1": c.len_c1, "len_c2": c.len_c2, "chosen": c.chosen + c.loops,
                    "zero_counts": [list(z) for z in c.zero_counts], "refined": c.refined,
                    "retries": c.retries,
                }
                for c in self.components
            ],
            "timings": dict(self.timings),
        }
        if self.oracle_cc is not None:
            rep["oracle_cc"] = self.oracle_cc
        if with_cover:
            rep["cover"] = [sorted(c) for c in self.cover.cycles]
        return rep


def solve(G: Multigraph, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Build a cycle cover of ``G`` of length below 29m/18 + n2/18 (per component)."""
    opts = opts or SolveOptions()
    t0 = time.perf_counter()
    bridges = find_bridges(G)
    if bridges:
        raise BridgeError(bridges)
    core, loops = strip_loops(G)
    cycles: List[EdgeSet] = [frozenset([e]) for e in loops]
    comps: List[ComponentResult] = []
    loop_at: Dict[int, int] = {}
    for e in loops:
        v = G.edges[e].u
        loop_at[v] = loop_at.get(v, 0) + 1
    for vs in connected_components(core):
        es = frozenset(e for v in vs for e in core.incidence[v])
        nloops = sum(loop_at.get(v, 0) for v in vs)
        n2_orig = count_degree2(G, vs)
        if not es:
            if nloops:
                res = ComponentResult("loops", 0, 0, nloops, [], 0, 0)
            else:
                continue
        else:
            sub = Multigraph(vs, {e: core.edges[e] for e in es})
            if is_circuit_component(sub, vs):
                w = weight(sub, es)
                res = ComponentResult("circuit", w, count_degree2(sub), nloops, [es], w, w,
                                      target=theorem_bound(w, count_degree2(sub)))
            else:
                res = solve_component(sub, opts)
                res.loops = nloops
        res.n2_original = n2_orig
        comps.append(res)
        cycles.extend(res.cycles)
    t1 = time.perf_counter()
    cover = CycleCover(G, cycles)
    chk = verify_cover(G, cycles)
    m = G.total_weight
    n2 = count_degree2(G)
    result = SolveResult(G, cover, comps, loops, m, n2, theorem_bound(m, n2), chk.valid,
                         timings={"solve_s": t1 - t0})
    if opts.oracle:
        t2 = time.perf_counter()
        try:
            result.oracle_cc = exact_cc_oracle(G, upper_bound=cover.length)
        except OracleRefused as exc:
            log.info("oracle skipped: %s", exc)
        result.timings["oracle_s"] = time.perf_counter() - t2
    return result
