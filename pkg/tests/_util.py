"""Brute-force helpers shared by the tests."""
import itertools
from typing import Dict, Iterator, List

import numpy as np

from cyccov import corpus
from cyccov.flows import add_cycle_flow, zero_flow
from cyccov.graphcore import EdgeSet, Multigraph, cycle_space_basis, is_circuit


def all_even_subgraphs(G: Multigraph) -> List[EdgeSet]:
    basis = cycle_space_basis(G)
    out = []
    for bits in itertools.product([0, 1], repeat=len(basis)):
        s = frozenset()
        for b, c in zip(bits, basis):
            if b:
                s = s ^ c
        out.append(s)
    return out


def all_circuits(G: Multigraph) -> List[EdgeSet]:
    return sorted((s for s in set(all_even_subgraphs(G)) if s and is_circuit(G, s)), key=sorted)


def all_flows(G: Multigraph) -> Iterator[Dict[int, int]]:
    """Every Z2xZ2 flow of G: one value per cycle-space basis vector."""
    basis = cycle_space_basis(G)
    for vals in itertools.product(range(4), repeat=len(basis)):
        f = {e: 0 for e in G.edges}
        for b, a in zip(basis, vals):
            if a:
                for e in b:
                    f[e] ^= a
        yield f


def random_flow(G: Multigraph, rng: np.random.Generator) -> Dict[int, int]:
    f = zero_flow(G)
    for b in cycle_space_basis(G):
        f = add_cycle_flow(G, f, b, int(rng.integers(0, 4)))
    return f


def random_lemma_instance(seed: int, max_m: int = 30):
    """A (host, flow, circuit) triple; the flow is arbitrary on and off the circuit."""
    rng = np.random.default_rng(seed)
    while True:
        G = corpus.random_bridgeless_multigraph(rng, max_m)
        basis = cycle_space_basis(G)
        if not basis:
            continue
        # a random circuit: the first circuit found inside a random even subgraph, else a basis circuit
        from cyccov.graphcore import find_cycle_within
        S = frozenset()
        for b in basis:
            if rng.random() < 0.5:
                S = S ^ b
        cyc = find_cycle_within(G, S) if S else None
        C = frozenset(cyc) if cyc else frozenset(basis[int(rng.integers(0, len(basis)))])
        if not is_circuit(G, C):
            cyc = find_cycle_within(G, C)
            C = frozenset(cyc)
        return G, random_flow(G, rng), C
