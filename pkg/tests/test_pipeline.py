from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyccov import BridgeError, Multigraph, SolveOptions, corpus, solve, theorem_bound
from cyccov.cover import verify_cover
from cyccov.flows import NoNowhereZeroFlow, nowhere_zero_flow


def strip_timing(rep):
    rep = dict(rep)
    rep.pop("timings")
    return rep


def test_theorem_bound_exact():
    assert theorem_bound(3, 3) == Fraction(9, 2)
    assert theorem_bound(15, 0) == Fraction(71, 3)
    assert theorem_bound(6, 0) == Fraction(55, 6)


@pytest.mark.parametrize("G,expect", [
    (corpus.circuit(3), 3), (corpus.circuit(1), 1), (Multigraph.from_pairs([(0, 1), (0, 1)]), 2),
])
def test_circuits_cover_themselves(G, expect):
    r = solve(G)
    assert r.valid and r.chosen == expect and r.components[0].kind in ("circuit", "loops")


def test_k4_and_petersen(k4, petersen):
    r = solve(k4, SolveOptions(oracle=True))
    assert r.valid and r.bound_ok and r.chosen <= 9 and r.oracle_cc == 8
    r = solve(petersen, SolveOptions(oracle=True))
    assert r.valid and r.bound_ok and r.chosen <= 23 and r.oracle_cc == 21
    assert r.report()["f_size"] == 10


def test_loops_and_components():
    G = Multigraph.from_pairs([(0, 1), (1, 2), (2, 0), (0, 0), (3, 3), (3, 3), (4, 5), (5, 6), (6, 4)])
    r = solve(G)
    assert r.valid and r.bound_ok and r.chosen == 9
    kinds = sorted(c["kind"] for c in r.report()["components"])
    assert kinds == ["circuit", "circuit", "loops"]


def test_isolated_vertices():
    G = Multigraph(frozenset([0, 1, 2]), {})
    r = solve(G)
    assert r.valid and r.chosen == 0 and r.components == []


def test_disconnected_pipeline_components(k4, petersen):
    G = Multigraph.from_pairs([(e.u, e.v) for e in k4.edges.values()] +
                              [(e.u + 10, e.v + 10) for e in petersen.edges.values()])
    r = solve(G)
    assert r.valid and r.bound_ok and len(r.components) == 2


def test_bridge_error_lists_ids():
    G = Multigraph.from_pairs([(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6)])
    with pytest.raises(BridgeError) as exc:
        solve(G)
    assert exc.value.bridges == [3, 7]


def test_petersen_has_no_nowhere_zero_flow(petersen):
    with pytest.raises(NoNowhereZeroFlow, match="no nowhere-zero 4-flow"):
        nowhere_zero_flow(petersen)


def test_refine_q_option(petersen):
    G = corpus.subdivide(petersen, {e: 3 for e in petersen.edges})
    a = solve(G)
    b = solve(G, SolveOptions(refine_q=True))
    assert a.bound_ok and b.bound_ok and b.valid


@pytest.mark.parametrize("seed", [0, 1, 17])
def test_determinism(petersen, seed):
    opts = SolveOptions(seed=seed)
    assert strip_timing(solve(petersen, opts).report()) == strip_timing(solve(petersen, opts).report())


def test_seed_changes_only_tie_breaks(petersen):
    for seed in range(5):
        r = solve(petersen, SolveOptions(seed=seed))
        assert r.valid and r.bound_ok


def test_report_fields(k4):
    rep = solve(k4).report()
    for key in ("m", "n2", "f_size", "len_c1", "len_c2", "chosen", "bound", "retries", "valid"):
        assert key in rep
    assert rep["chosen"] == min(rep["len_c1"], rep["len_c2"])
    assert verify_cover(k4, rep["cover"]).valid


@settings(max_examples=40)
@given(st.integers(0, 2**31 - 1))
def test_random_graphs_meet_bound(seed):
    G = corpus.random_bridgeless_multigraph(np.random.default_rng(seed), 40)
    r = solve(G)
    assert r.valid and r.bound_ok, r.violations
