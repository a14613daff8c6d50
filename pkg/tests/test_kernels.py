"""The numba kernels and their pure Python/numpy fallbacks must agree exactly."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cyccov import _kernels
from cyccov.flows import _nz_search_setup
from cyccov import corpus

needs_numba = pytest.mark.skipif(_kernels.numba is None, reason="numba not installed")


def _nz_inputs(G):
    cot, tree_masks, level_masks = _nz_search_setup(G)
    return level_masks, len(cot)


@needs_numba
@pytest.mark.parametrize("name,G", corpus.bridgeless_cubic_graphs(10)[::3] + [("petersen", corpus.petersen())])
def test_nz4_search_equivalence(name, G):
    lm, k = _nz_inputs(G)
    for limit in (1, 5, 50):
        assert _kernels.nz4_search(lm, k, limit, use_numba=True) == _kernels.nz4_search(lm, k, limit, use_numba=False)


def test_nz4_search_empty():
    assert _kernels.nz4_search([], 0) == [(0, 0)]


@needs_numba
@given(st.lists(st.integers(0, 2**63 - 1), max_size=10))
def test_even_masks_equivalence(basis):
    a = _kernels.even_masks(basis, use_numba=True)
    b = _kernels.even_masks(basis, use_numba=False)
    assert a == b
    assert len(a) == 2 ** len(basis)


def test_even_masks_wide_fallback():
    basis = [1 << 70, 3, 1 << 64 | 1]
    out = _kernels.even_masks(basis)
    assert sorted(out) == sorted({0, 1 << 70, 3, (1 << 70) ^ 3, (1 << 64) | 1, (1 << 70) ^ (1 << 64) ^ 1,
                                  (1 << 64) ^ 2, (1 << 70) ^ (1 << 64) ^ 2})


def _bnb_instance(seed):
    rng = np.random.default_rng(seed)
    nbits = int(rng.integers(1, 12))
    gw = [int(x) for x in rng.integers(1, 4, size=nbits)]
    full = (1 << nbits) - 1
    masks = sorted({int(x) for x in rng.integers(1, full + 1, size=int(rng.integers(1, 25)))} | {full})
    wts = {m: sum(gw[b] for b in range(nbits) if m >> b & 1) for m in masks}
    masks.sort(key=lambda m: (wts[m], m))
    return masks, [wts[m] for m in masks], gw, full


@needs_numba
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_cover_bnb_equivalence(seed, k):
    masks, w, gw, full = _bnb_instance(seed)
    init = 3 * sum(gw) + 1
    a = _kernels.cover_bnb(masks, w, gw, full, k, init, use_numba=True)
    b = _kernels.cover_bnb(masks, w, gw, full, k, init, use_numba=False)
    assert a == b <= sum(gw)


def test_cover_bnb_bruteforce():
    import itertools
    for seed in range(30):
        masks, w, gw, full = _bnb_instance(seed)
        best = None
        for k in range(1, 4):
            for combo in itertools.combinations(range(len(masks)), k):
                u = 0
                for j in combo:
                    u |= masks[j]
                if u == full:
                    s = sum(w[j] for j in combo)
                    best = s if best is None else min(best, s)
        assert _kernels.cover_bnb(masks, w, gw, full, 3, 10**9, use_numba=False) == best


def _label_instance(seed):
    rng = np.random.default_rng(seed)
    nvars = int(rng.integers(1, 7))
    groups = [(1 << i, int(rng.integers(1, 4))) for i in range(nvars)]
    for _ in range(int(rng.integers(0, 8))):
        groups.append((int(rng.integers(1, 1 << nvars)), int(rng.integers(0, 4))))
    return groups, nvars


def _label_brute(groups, nvars, k):
    import itertools
    best = None
    for xs in itertools.product(range(1 << k), repeat=nvars):
        cost = 0
        for sig, w in groups:
            lab = 0
            for i in range(nvars):
                if sig >> i & 1:
                    lab ^= xs[i]
            if not lab:
                break
            cost += w * bin(lab).count("1")
        else:
            best = cost if best is None else min(best, cost)
    return best


@pytest.mark.parametrize("seed", range(40))
def test_label_bnb_bruteforce(seed):
    groups, nvars = _label_instance(seed)
    k = 2 + seed % 2
    want = _label_brute(groups, nvars, k)
    assert _kernels.label_bnb(groups, nvars, k, 10**9, use_numba=False) == want


@needs_numba
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_label_bnb_equivalence(seed, k):
    groups, nvars = _label_instance(seed)
    a = _kernels.label_bnb(groups, nvars, k, 10**9, use_numba=True)
    b = _kernels.label_bnb(groups, nvars, k, 10**9, use_numba=False)
    assert a == b


def test_label_bnb_degenerate():
    assert _kernels.label_bnb([], 0, 4, 99) == 0
    assert _kernels.label_bnb([(0, 1)], 1, 4, 99) == 99  # a bridge: nothing covers it
    assert _kernels.label_bnb([(1, 5)], 1, 4, 99) == 5
    assert _kernels.label_bnb([(1, 5)], 1, 4, 5) == 5  # nothing beats the initial bound


def test_env_flag_disables_numba():
    code = "from cyccov import _kernels; print(_kernels.NUMBA_ENABLED)"
    env = dict(os.environ, CYCCOV_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_fallback_pipeline_matches_numba():
    """A full solve under the fallback kernels gives the same report."""
    code = ("import json; from cyccov import solve, SolveOptions, corpus;"
            "r = solve(corpus.petersen(), SolveOptions(oracle=True)).report();"
            "r.pop('timings'); print(json.dumps(r, sort_keys=True))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, CYCCOV_NO_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                   check=True).stdout)
    assert outs[0] == outs[1]


@needs_numba
def test_benchmark_smoke(tmp_path):
    import importlib.util
    from pathlib import Path
    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    out = tmp_path / "bench.json"
    bench.main(["--repeat", "1", "--json", str(out)])
    rows = json.loads(out.read_text())["rows"]
    assert {r["case"].split()[0] for r in rows} == {"nz4_search", "even_masks", "cover_bnb", "label_bnb"}
