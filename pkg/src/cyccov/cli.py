"""Command line interface: ``cyccov solve | batch | oracle``.

Exit codes: 0 success, 1 input error (unreadable/malformed input, bridges,
oracle refusal), 2 bound violation or failed internal guarantee.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from .cover import OracleRefused, exact_cc_oracle
from .graphcore import GraphError, Multigraph, cycle_space_dimension
from .pipeline import BridgeError, SolveOptions, solve

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2
G6_SUFFIXES = {".g6", ".graph6"}
EDGE_SUFFIXES = {".edges", ".txt", ".el"}
G6_HEADER = ">>graph6<<"


class GraphParseError(GraphError):
    """Malformed input; ``offset`` is a byte offset (graph6) and ``line`` a 1-based line number."""

    def __init__(self, message: str, offset: Optional[int] = None, line: Optional[int] = None):
        self.offset, self.line = offset, line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


# ------------------------------------------------------------------ parsing


def parse_graph6(line: str) -> Multigraph:
    """Decode one graph6 string (optionally prefixed by ``>>graph6<<``)."""
    text = line.strip("\r\n")
    base = 0
    if text.startswith(G6_HEADER):
        text = text[len(G6_HEADER):]
        base = len(G6_HEADER)
    if not text:
        raise GraphParseError("empty graph6 string", offset=base)
    if text[0] in ":;":
        raise GraphParseError("sparse6 is not supported; use graph6 or an edge list", offset=base)
    if text[0] == "&":
        raise GraphParseError("digraph6 is not supported", offset=base)
    data = []
    for i, ch in enumerate(text):
        c = ord(ch)
        if not 63 <= c <= 126:
            raise GraphParseError(f"byte {c!r} outside the graph6 range 63..126", offset=base + i)
        data.append(c - 63)
    # vertex count N(n)
    if data[0] != 63:
        n, pos = data[0], 1
    elif len(data) >= 2 and data[1] != 63:
        if len(data) < 4:
            raise GraphParseError("truncated 18-bit vertex count", offset=base + len(data))
        n = (data[1] << 12) | (data[2] << 6) | data[3]
        pos = 4
    else:
        if len(data) < 8:
            raise GraphParseError("truncated 36-bit vertex count", offset=base + len(data))
        n = 0
        for k in range(2, 8):
            n = (n << 6) | data[k]
        pos = 8
    nbits = n * (n - 1) // 2
    need = (nbits + 5) // 6
    have = len(data) - pos
    if have != need:
        raise GraphParseError(f"expected {need} data bytes for n={n}, found {have}",
                              offset=base + pos + min(have, need))
    pairs = []
    k = 0
    for j in range(1, n):
        for i in range(j):
            byte, bit = divmod(k, 6)
            if data[pos + byte] >> (5 - bit) & 1:
                pairs.append((i, j))
            k += 1
    if nbits % 6 and data[-1] & ((1 << (6 - nbits % 6)) - 1):
        raise GraphParseError("nonzero padding bits", offset=base + len(data) - 1)
    return Multigraph.from_pairs(pairs, range(n))


def to_graph6(G: Multigraph) -> str:
    """Encode a simple graph on vertices 0..n-1 as graph6."""
    n = len(G.vertices)
    if set(G.vertices) != set(range(n)):
        raise GraphError("to_graph6 needs vertices 0..n-1")
    adj = set()
    for e in G.edges.values():
        if e.is_loop:
            raise GraphError("graph6 cannot express loops")
        key = (min(e.u, e.v), max(e.u, e.v))
        if key in adj:
            raise GraphError("graph6 cannot express parallel edges")
        adj.add(key)
    if n < 63:
        out = [n]
    elif n < 258048:
        out = [63, n >> 12 & 63, n >> 6 & 63, n & 63]
    else:
        out = [63, 63] + [n >> s & 63 for s in range(30, -1, -6)]
    bits = [1 if (i, j) in adj else 0 for j in range(1, n) for i in range(j)]
    bits += [0] * (-len(bits) % 6)
    for k in range(0, len(bits), 6):
        v = 0
        for b in bits[k:k + 6]:
            v = v << 1 | b
        out.append(v)
    return "".join(chr(x + 63) for x in out)


def parse_edgelist(text: str) -> Multigraph:
    """Parse ``u v`` lines; ``#`` starts a comment.  Edge ids follow line order from 0."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        toks = body.split()
        if len(toks) != 2:
            raise GraphParseError(f"expected 'u v', got {body!r}", line=lineno)
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphParseError(f"vertex ids must be non-negative integers, got {body!r}", line=lineno) from None
        if u < 0 or v < 0:
            raise GraphParseError(f"vertex ids must be non-negative, got {body!r}", line=lineno)
        pairs.append((u, v))
    return Multigraph.from_pairs(pairs)


def detect_format(path: Path, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "g6" if path.suffix.lower() in G6_SUFFIXES else "edges"


def read_sources(path: Path, fmt: Optional[str]) -> List[Tuple[str, str, str]]:
    """``(name, format, text)`` per graph in a file or directory, in a stable order."""
    if path.is_dir():
        out = []
        for child in sorted(path.iterdir()):
            suffix = child.suffix.lower()
            if child.is_file() and (suffix in G6_SUFFIXES or suffix in EDGE_SUFFIXES or fmt):
                out.extend(read_sources(child, fmt))
        return out
    text = path.read_text()
    f = detect_format(path, fmt)
    if f == "edges":
        return [(path.name, f, text)]
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            out.append((f"{path.name}:{lineno}", f, line))
    return out


def parse_source(fmt: str, text: str) -> Multigraph:
    return parse_graph6(text) if fmt == "g6" else parse_edgelist(text)


def load_single(path: Path, fmt: Optional[str]) -> Tuple[str, Multigraph]:
    srcs = read_sources(path, fmt)
    if len(srcs) != 1:
        raise GraphParseError(f"expected exactly one graph in {path}, found {len(srcs)} (use `cyccov batch`)")
    name, f, text = srcs[0]
    return name, parse_source(f, text)


def schema() -> dict:
    """The JSON schema of the solve report."""
    return json.loads(resources.files("cyccov").joinpath("schemas/solve_report.schema.json").read_text())


# ------------------------------------------------------------------ commands


def _options(args) -> SolveOptions:
    return SolveOptions(refine_q=args.refine_q, oracle=args.oracle,
                        matching_limit=args.matching_limit, seed=args.seed)


def _fmt_bound(b: Fraction) -> str:
    return f"{b} ({float(b):.3f})"


def _print_text_report(name: str, rep: dict, result) -> None:
    print(f"graph     {name}")
    print(f"m={rep['m']} n2={rep['n2']} loops={rep['loops']} |F|={rep['f_size']}")
    print(f"len(C1)={rep['len_c1']} len(C2)={rep['len_c2']} chosen={rep['chosen']}")
    status = "OK" if not rep["violations"] else "VIOLATION"
    print(f"bound     29m/18 + n2/18 - 1/2 = {_fmt_bound(result.bound)}  {status}")
    if "oracle_cc" in rep:
        print(f"oracle cc {rep['oracle_cc']}")
    print(f"retries={rep['retries']} valid={'true' if rep['valid'] else 'false'}")
    for v in rep["violations"]:
        print(f"violation: {v}")


def cmd_solve(args) -> int:
    path = Path(args.file)
    try:
        name, G = load_single(path, args.format)
        result = solve(G, _options(args))
    except BridgeError as exc:
        _emit_error(args, "bridges", f"input has bridges (edge ids): {' '.join(map(str, exc.bridges))}",
                    bridges=exc.bridges)
        return EXIT_INPUT
    except (GraphError, OSError) as exc:
        _emit_error(args, "input", str(exc))
        return EXIT_INPUT
    except Exception as exc:  # a broken internal guarantee
        _emit_error(args, "guarantee", f"{type(exc).__name__}: {exc}")
        return EXIT_VIOLATION
    rep = result.report(with_cover=args.cover)
    rep["name"] = name
    if args.json:
        print(json.dumps(rep, indent=2 if args.pretty else None, sort_keys=True))
    else:
        _print_text_report(name, rep, result)
    return EXIT_OK if result.valid and not rep["violations"] else EXIT_VIOLATION


def _emit_error(args, kind: str, message: str, **extra) -> None:
    if getattr(args, "json", False):
        print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True))
    print(f"error: {message}", file=sys.stderr)


def batch_row(task: Tuple[int, str, str, str, dict]) -> dict:
    """Solve one batch entry; every failure becomes a row instead of an exception."""
    index, name, fmt, text, opts = task
    row = {"index": index, "name": name, "status": "ok", "m": None, "n2": None, "chosen": None,
           "bound": None, "ratio": None, "retries": None, "error": None}
    try:
        G = parse_source(fmt, text)
        result = solve(G, SolveOptions(**opts))
    except BridgeError as exc:
        row.update(status="input_error", error=f"bridges {exc.bridges}")
        return row
    except GraphError as exc:
        row.update(status="input_error", error=str(exc))
        return row
    except Exception as exc:
        row.update(status="violation", error=f"{type(exc).__name__}: {exc}")
        return row
    rep = result.report(with_cover=False)
    row.update(m=rep["m"], n2=rep["n2"], chosen=rep["chosen"], bound=rep["bound_exact"],
               ratio=(rep["chosen"] / rep["m"]) if rep["m"] else None, retries=rep["retries"],
               f_size=rep["f_size"], len_c1=rep["len_c1"], len_c2=rep["len_c2"])
    if "oracle_cc" in rep:
        row["oracle_cc"] = rep["oracle_cc"]
    if rep["violations"] or not rep["valid"]:
        row.update(status="violation", error="; ".join(rep["violations"]) or "invalid cover")
    return row


def run_batch(sources: Sequence[Tuple[str, str, str]], opts: SolveOptions, jobs: int = 1) -> Tuple[List[dict], dict]:
    tasks = [(i, name, fmt, text, asdict(opts)) for i, (name, fmt, text) in enumerate(sources)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(batch_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [batch_row(t) for t in tasks]
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    summary = {
        "graphs": len(rows),
        "ok": sum(r["status"] == "ok" for r in rows),
        "input_errors": sum(r["status"] == "input_error" for r in rows),
        "violations": sum(r["status"] == "violation" for r in rows),
        "max_ratio": max(ratios) if ratios else None,
    }
    return rows, summary


def cmd_batch(args) -> int:
    path = Path(args.path)
    try:
        sources = read_sources(path, args.format)
    except OSError as exc:
        _emit_error(args, "input", str(exc))
        return EXIT_INPUT
    rows, summary = run_batch(sources, _options(args), args.jobs)
    if args.json:
        print(json.dumps({"rows": rows, "summary": summary}, sort_keys=True))
    else:
        print(f"{'#':>5} {'name':<24} {'m':>4} {'n2':>4} {'chosen':>6} {'bound':>9} {'ratio':>6}  status")
        for r in rows:
            if r["m"] is None:
                print(f"{r['index']:>5} {r['name']:<24} {'-':>4} {'-':>4} {'-':>6} {'-':>9} {'-':>6}  "
                      f"{r['status']}: {r['error']}")
                continue
            ratio = f"{r['ratio']:.3f}" if r["ratio"] is not None else "-"
            status = r["status"] if not r["error"] else f"{r['status']}: {r['error']}"
            print(f"{r['index']:>5} {r['name']:<24} {r['m']:>4} {r['n2']:>4} {r['chosen']:>6} "
                  f"{float(Fraction(r['bound'])):>9.3f} {ratio:>6}  {status}")
        mr = f"{summary['max_ratio']:.4f}" if summary["max_ratio"] is not None else "-"
        print(f"graphs={summary['graphs']} ok={summary['ok']} input_errors={summary['input_errors']} "
              f"violations={summary['violations']} max_ratio={mr}")
    if summary["violations"]:
        return EXIT_VIOLATION
    return EXIT_INPUT if summary["input_errors"] else EXIT_OK


def cmd_oracle(args) -> int:
    path = Path(args.file)
    try:
        name, G = load_single(path, args.format)
        cc = exact_cc_oracle(G, max_members=args.max_members)
    except (GraphError, OracleRefused, OSError) as exc:
        _emit_error(args, "input", str(exc))
        return EXIT_INPUT
    if args.json:
        print(json.dumps({"name": name, "m": G.total_weight, "dim": cycle_space_dimension(G), "oracle_cc": cc},
                         sort_keys=True))
    else:
        print(f"{name}: cc = {cc}")
    return EXIT_OK


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cyccov", description="Short cycle covers of bridgeless multigraphs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log pipeline progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, oracle=True):
        sp.add_argument("--format", choices=["g6", "edges"], default=None,
                        help="input format (default: by extension, .g6/.graph6 = graph6, otherwise edge list)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if oracle:
            sp.add_argument("--refine-q", action="store_true", help="use the long-thread refinement (q > 1)")
            sp.add_argument("--oracle", action="store_true", help="also compute exact cc (small graphs only)")
            sp.add_argument("--matching-limit", type=int, default=SolveOptions.matching_limit,
                            help="maximum perfect matchings examined per component")
            sp.add_argument("--seed", type=int, default=0, help="tie-break seed (0 = canonical order)")

    s = sub.add_parser("solve", help="cover one graph")
    s.add_argument("file")
    common(s)
    s.add_argument("--pretty", action="store_true", help="indent JSON output")
    s.add_argument("--no-cover", dest="cover", action="store_false", help="omit the cycle list from JSON")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("batch", help="cover every graph of a .g6 file or a directory")
    b.add_argument("path")
    common(b)
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.set_defaults(func=cmd_batch)

    o = sub.add_parser("oracle", help="exact cc by exhaustive search (cycle-space dimension <= 16)")
    o.add_argument("file")
    common(o, oracle=False)
    o.add_argument("--max-members", type=int, default=4, help="maximum number of cover members")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Optional[Iterable[str]] = None) -> int:
    args = build_parser().parse_args(None if argv is None else list(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
