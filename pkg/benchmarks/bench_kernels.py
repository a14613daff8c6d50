"""Numba kernels versus their pure Python/numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Each row times one kernel on one input with both implementations (after a
warm-up call, so numba compilation is excluded) and checks that the results
are identical.
"""
from __future__ import annotations

import argparse
import json
import platform
import statistics
import time

from cyccov import _kernels, corpus
from cyccov.cover import _edge_groups, _variable_order
from cyccov.flows import _nz_search_setup
from cyccov.graphcore import cycle_space_basis


def timed(fn, repeat):
    fn()  # warm-up (numba compilation, caches)
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples), out


def nz4_case(name, G, limit):
    cot, _, level_masks = _nz_search_setup(G)
    return (f"nz4_search {name} (limit {limit})",
            lambda nb: _kernels.nz4_search(level_masks, len(cot), limit, use_numba=nb))


def even_case(name, G):
    basis = cycle_space_basis(G)
    masks = []
    edges = G.sorted_edges
    pos = {e: i for i, e in enumerate(edges)}
    for b in basis:
        m = 0
        for e in b:
            m |= 1 << pos[e]
        masks.append(m)
    return f"even_masks {name} (dim {len(basis)})", lambda nb: sorted(_kernels.even_masks(masks, use_numba=nb))


def setcover_case(name, G):
    basis, keys, gw = _edge_groups(G)
    gbasis = []
    for i in range(len(basis)):
        gbasis.append(sum(1 << j for j, k in enumerate(keys) if k >> i & 1))
    masks = [x for x in set(_kernels.even_masks(gbasis)) if x]
    wts = {x: sum(gw[j] for j in range(len(gw)) if x >> j & 1) for x in masks}
    masks.sort(key=lambda x: (wts[x], x))
    w = [wts[x] for x in masks]
    full = (1 << len(gw)) - 1
    return (f"cover_bnb {name} (dim {len(basis)})",
            lambda nb: _kernels.cover_bnb(masks, w, gw, full, 4, 4 * sum(gw) + 1, use_numba=nb))


def label_case(name, G):
    basis, sigs, gw = _edge_groups(G)
    n = len(basis)
    perm = _variable_order(sigs, gw, n)
    where = {old: new for new, old in enumerate(perm)}
    groups = [(sum(1 << where[i] for i in range(n) if s >> i & 1), w) for s, w in zip(sigs, gw)]
    return (f"label_bnb {name} (dim {n})",
            lambda nb: _kernels.label_bnb(groups, n, 4, 4 * sum(gw) + 1, use_numba=nb))


def cases():
    pet, q3, k5 = corpus.petersen(), corpus.cube(), corpus.complete(5)
    cubic10 = corpus.connected_cubic_graphs(10)[-1]
    rand = dict(corpus.random_corpus(200, seed=2024))
    big = max(rand.values(), key=lambda G: len(cycle_space_basis(G)) if len(cycle_space_basis(G)) <= 12 else -1)
    return [
        nz4_case("K5", k5, 1000),
        nz4_case("Q3", q3, 1000),
        nz4_case("Petersen", pet, 1),
        even_case("Petersen", pet),
        even_case("K6", corpus.complete(6)),
        setcover_case("Petersen", pet),
        setcover_case("cubic10", cubic10),
        label_case("Petersen", pet),
        label_case("cubic10", cubic10),
        label_case("random m<=60", big),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args(argv)
    if _kernels.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = []
    print(f"{'kernel / input':<40} {'numba ms':>10} {'fallback ms':>12} {'speedup':>8}")
    for label, fn in cases():
        t_nb, out_nb = timed(lambda: fn(True), args.repeat)
        t_py, out_py = timed(lambda: fn(False), args.repeat)
        if out_nb != out_py:
            raise SystemExit(f"{label}: numba and fallback disagree")
        rows.append({"case": label, "numba_s": t_nb, "fallback_s": t_py, "speedup": t_py / t_nb})
        print(f"{label:<40} {1e3 * t_nb:>10.3f} {1e3 * t_py:>12.3f} {t_py / t_nb:>7.1f}x")
    if args.json:
        meta = {"python": platform.python_version(), "numba": _kernels.numba.__version__,
                "machine": platform.machine(), "repeat": args.repeat}
        with open(args.json, "w") as fh:
            json.dump({"meta": meta, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
