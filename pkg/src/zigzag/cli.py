"""zgz: encode files into shards, break them, rebuild and scrub them.

Exit codes: 0 clean / success, 2 data was corrected or restored,
3 uncorrectable (or the code is not MDS), 4 bad parameters or input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import Counter
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .anynode import AnyNodeCode, build_anynode, rebuild_any
from .error_decoder import (
    Diagnosis, correct_erasure_plus_element, correct_node_error,
)
from .exceptions import DecodeError, UncorrectableError, ZigzagError
from .field import field_new
from .linear import AccessLog, CodeWordArray, ShardReader, decode_columns, verify_mds_code
from .rebuild import (
    bandwidth_lower_bound, file_size_upper_bound, full_decode, normalized_bandwidth_bound,
    plan_multi, ratio_lower_bound, ratio_sweep, ratio_upper_bound_partial, rebuild_multi,
    rebuild_single,
)
from .rowspace import RVec
from .shardfile import (
    ShardSet, bytes_to_symbols, code_from_header, header_for, join_stripes, load_shards,
    shard_name, split_stripes, symbols_for_length, symbols_to_bytes, write_shard,
)
from .zigzag import DEFAULT_FIELD, ZigzagCode, build_optimal, build_searched

EXIT_OK, EXIT_CORRECTED, EXIT_UNCORRECTABLE, EXIT_PARAM = 0, 2, 3, 4


class ParamError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def frac(x: Fraction | None) -> str | None:
    return None if x is None else f"{x.numerator}/{x.denominator}"


@dataclass
class StatsReport:
    patterns: list = dc_field(default_factory=list)  # (erased tuple, Fraction ratio)
    lower_bound: Fraction | None = None
    upper_bound: Fraction | None = None
    wall_time: float = 0.0
    fallback: bool = False

    @property
    def average(self) -> Fraction | None:
        if not self.patterns:
            return None
        return sum((r for _, r in self.patterns), Fraction(0)) / len(self.patterns)

    def to_json(self) -> dict:
        return {
            "patterns": [{"erased": list(e), "ratio": frac(r)} for e, r in self.patterns],
            "average": frac(self.average),
            "lower_bound": frac(self.lower_bound),
            "upper_bound": frac(self.upper_bound),
            "fallback": self.fallback,
            "wall_time": round(self.wall_time, 6),
        }


# ---------------------------------------------------------------------------
# Codec from flags
# ---------------------------------------------------------------------------


def _parse_T(text: str, r: int) -> list[RVec]:
    vectors = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            vectors.append(RVec.of(r, [int(d) for d in part.split(",")]))
    if not vectors:
        raise ParamError("--T needs at least one vector")
    return vectors


def codec_from_args(args):
    r, m = args.r, args.m
    if args.construction == 2:
        q = args.field or DEFAULT_FIELD.get(r, 256)
        return build_anynode(r, m, field_new(q), args.alpha, seed=args.seed, max_tries=args.tries)
    if args.T:
        T = _parse_T(args.T, r)
        q = args.field or 256
        return build_searched(r, T[0].m, T, field_new(q), args.seed or 0, args.tries)
    field = field_new(args.field) if args.field else None
    if field is None and r not in DEFAULT_FIELD:
        field = field_new(256)
    seed = args.seed if args.seed is not None or r in (2, 3) else 0
    return build_optimal(r, m, field, seed=seed, max_tries=args.tries)


def _codec_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("codec")
    g.add_argument("--construction", type=int, choices=(1, 2), default=1,
                   help="1 = zigzag (optimal multi-erasure), 2 = any-node code")
    g.add_argument("--r", type=int, default=2, help="number of parity nodes")
    g.add_argument("--m", type=int, default=2, help="rows are r^m; k = m+1 (or m-1 for the any-node code)")
    g.add_argument("--field", type=int, default=None, help="field order q (default GF(3) for r=2, GF(4) for r=3, "
                        "GF(256) otherwise and for --T)")
    g.add_argument("--seed", type=int, default=None, help="seed of the coefficient search")
    g.add_argument("--tries", type=int, default=200, help="coefficient search budget")
    g.add_argument("--alpha", type=int, default=None, help="any-node diagonal scale (default primitive)")
    g.add_argument("--T", default=None,
                   help="general generator vectors, e.g. '0,0;1,0;0,1;1,1' (zigzag code)")


# ---------------------------------------------------------------------------
# Rebuild routing
# ---------------------------------------------------------------------------


def rebuild_stripe(code, columns, erased):
    """Pick the rebuild path for this code and erasure set; returns ({node: col}, AccessLog)."""
    erased = tuple(sorted(erased))
    if isinstance(code, ZigzagCode):
        if len(erased) == 1:
            col, log = rebuild_single(code, columns, erased[0])
            return {erased[0]: col}, log
        return rebuild_multi(code, columns, erased)
    if isinstance(code, AnyNodeCode) and len(erased) == 1:
        col, log = rebuild_any(code, columns, erased[0])
        return {erased[0]: col}, log
    if len(erased) > code.r:
        raise DecodeError(f"{len(erased)} erasures exceed r={code.r}", erased)
    reader = ShardReader(columns, erased=erased)
    return full_decode(code, reader, erased, "multiple erasures: full decode")


def _bounds_for(code, erased) -> tuple[Fraction | None, Fraction | None]:
    e = len(erased)
    if not 1 <= e <= code.r:
        return None, None
    lower = ratio_lower_bound(e, code.r)
    upper = None
    if isinstance(code, ZigzagCode) and all(j < code.k for j in erased) and e < code.r:
        try:
            plan = plan_multi(code, erased)
            if e < code.k:
                upper = ratio_upper_bound_partial(e, code.r, code.k, len(plan.helpers))
        except ZigzagError:
            pass
    return lower, upper


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_encode(args) -> int:
    code = codec_from_args(args)
    data = sys.stdin.buffer.read() if args.input == "-" else Path(args.input).read_bytes()
    symbols = bytes_to_symbols(data, code.field.q, args.packing)
    info = split_stripes(symbols, code.k, code.p)
    stripes = info.shape[0]
    parity = code.encode(info).parity if stripes else np.zeros((0, code.p, code.r), dtype=np.int64)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for node in range(code.n):
        col = info[..., node] if node < code.k else parity[..., node - code.k]
        write_shard(out, header_for(code, node, stripes, len(data), args.packing), col)
    _emit(args, {"shards": code.n, "stripes": stripes, "k": code.k, "r": code.r, "p": code.p,
                 "q": code.field.q, "directory": str(out)},
          f"wrote {code.n} shards ({stripes} stripes) to {out}")
    return EXIT_OK


def _load(args) -> tuple[ShardSet, object]:
    shards = load_shards(Path(args.dir))
    return shards, code_from_header(shards.header)


def _write_back(shards: ShardSet, code, nodes, columns_by_node):
    h = shards.header
    for node in nodes:
        col = columns_by_node[node]
        write_shard(shards.directory, replace(h, node=node), col)


def cmd_decode(args) -> int:
    shards, code = _load(args)
    h = shards.header
    if len(shards.missing) > code.r:
        raise DecodeError(f"{len(shards.missing)} shards missing, at most {code.r} can be recovered")
    infos = []
    for s in range(h.stripes):
        infos.append(decode_columns(code, shards.stripe(s)).info)
    info = np.stack(infos) if infos else np.zeros((0, code.p, code.k), dtype=np.int64)
    symbols = join_stripes(info)[:symbols_for_length(h.original_length, h.q, h.packing)]
    data = symbols_to_bytes(symbols, h.q, h.packing)
    if args.out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(args.out).write_bytes(data)
    return EXIT_OK


def cmd_rebuild(args) -> int:
    shards, code = _load(args)
    h = shards.header
    erased = tuple(shards.missing)
    if not erased:
        _emit(args, {"erased": [], "ratio": None}, "nothing to rebuild")
        return EXIT_OK
    if len(erased) > code.r:
        raise DecodeError(f"{len(erased)} shards missing, at most {code.r} can be rebuilt")
    t0 = time.perf_counter()
    restored = {j: np.zeros((h.stripes, code.p), dtype=np.int64) for j in erased}
    total: AccessLog | None = None
    for s in range(h.stripes):
        cols, log = rebuild_stripe(code, shards.stripe(s), erased)
        for j in erased:
            restored[j][s] = cols[j]
        total = log if total is None else total.merged(log)
    lower, upper = _bounds_for(code, erased)
    report = StatsReport(lower_bound=lower, upper_bound=upper,
                         fallback=bool(total and total.fallback))
    if total is not None:
        report.patterns.append((erased, total.ratio))
    report.wall_time = time.perf_counter() - t0
    _write_back(shards, code, erased, restored)
    payload = {"erased": list(erased), "stats": report.to_json()}
    if total is not None:
        payload["access"] = {"total": total.total, "remaining": total.remaining,
                             "ratio": frac(total.ratio)}
    ratio = frac(total.ratio) if total is not None else "n/a"
    _emit(args, payload, f"rebuilt {list(erased)}  ratio {ratio}  (lower bound {frac(lower)})")
    return EXIT_CORRECTED


def scrub_stripe(code, columns) -> Diagnosis:
    missing = [i for i, c in enumerate(columns) if c is None]
    if not missing:
        return correct_node_error(code, columns)
    if len(missing) > code.r:
        reason = f"{len(missing)} shards missing, more than r={code.r}"
        raise UncorrectableError(reason, Diagnosis("uncorrectable", reason=reason))
    if (isinstance(code, ZigzagCode) and code.r == 2 and len(missing) == 1
            and missing[0] < code.k and code.distinct_vectors):
        return correct_erasure_plus_element(code, columns, missing[0])
    try:
        word = decode_columns(code, columns)
    except DecodeError as exc:
        raise UncorrectableError(str(exc), Diagnosis("uncorrectable", reason=str(exc)))
    return Diagnosis("clean", word, details={"erased": missing})


def cmd_scrub(args) -> int:
    shards, code = _load(args)
    h = shards.header
    missing = shards.missing
    reports = []
    words: list[CodeWordArray | None] = []
    status = EXIT_OK
    for s in range(h.stripes):
        try:
            diag = scrub_stripe(code, shards.stripe(s))
        except UncorrectableError as exc:
            diag = exc.diagnosis or Diagnosis("uncorrectable", reason=str(exc))
        entry = {"stripe": s, **diag.to_json()}
        reports.append(entry)
        words.append(diag.corrected)
        if not diag.ok:
            status = EXIT_UNCORRECTABLE
        elif diag.kind != "clean" and status == EXIT_OK:
            status = EXIT_CORRECTED
    if missing and status == EXIT_OK:
        status = EXIT_CORRECTED
    if status == EXIT_CORRECTED and not args.dry_run:
        full = np.stack([w.full for w in words]) if words else np.zeros((0, code.p, code.n), np.int64)
        changed = set(missing)
        for s, w in enumerate(words):
            for j in range(code.n):
                if shards.columns[j] is not None and not np.array_equal(shards.columns[j][s], full[s, :, j]):
                    changed.add(j)
        _write_back(shards, code, sorted(changed), {j: full[:, :, j] for j in range(code.n)})
    verdict = {EXIT_OK: "clean", EXIT_CORRECTED: "corrected", EXIT_UNCORRECTABLE: "uncorrectable"}[status]
    counts = Counter(r["kind"] for r in reports)
    flagged = [r for r in reports if r["kind"] != "clean"]
    groups = Counter((r["kind"], json.dumps(r.get("location"))) for r in flagged)
    lines = [f"{kind} at {loc}: {n} stripe(s)" for (kind, loc), n in sorted(groups.items())]
    if missing:
        lines.append(f"restored missing shards {missing}")
    _emit(args, {"status": verdict, "missing": missing, "counts": dict(counts), "stripes": flagged},
          "\n".join(lines + [verdict]))
    return status


def cmd_corrupt(args) -> int:
    shards, code = _load(args)
    h = shards.header
    rng = np.random.default_rng(args.seed)
    faults = []
    f = code.field
    for cell in args.cell or []:
        parts = [int(x) for x in cell.split(",")]
        if len(parts) not in (2, 3):
            raise ParamError("--cell takes node,row[,stripe]")
        node, row = parts[:2]
        stripe = parts[2] if len(parts) == 3 else 0
        _check_node(shards, node)
        if not (0 <= row < code.p and 0 <= stripe < h.stripes):
            raise ParamError(f"cell ({node},{row},{stripe}) outside the shard")
        delta = args.delta % code.field.q
        if delta == 0:
            raise ParamError("--delta must be a nonzero field element")
        col = shards.columns[node]
        col[stripe, row] = f.add(col[stripe, row], delta)
        faults.append({"cell": [node, row, stripe], "delta": delta})
    for node in args.column or []:
        _check_node(shards, node)
        col = shards.columns[node]
        err = rng.integers(1, code.field.q, size=col.shape)
        shards.columns[node] = f.add(col, err)
        faults.append({"column": node})
    touched = sorted({x["cell"][0] for x in faults if "cell" in x} | set(args.column or []))
    _write_back(shards, code, touched, {j: shards.columns[j] for j in touched})
    for node in args.delete or []:
        _check_node(shards, node)
        (shards.directory / shard_name(node)).unlink()
        faults.append({"deleted": node})
    _emit(args, {"faults": faults}, "\n".join(json.dumps(x) for x in faults) or "no faults")
    if args.scrub:
        return cmd_scrub(args)
    return EXIT_OK


def _check_node(shards: ShardSet, node: int):
    if not 0 <= node < len(shards.columns):
        raise ParamError(f"node {node} outside [0, {len(shards.columns) - 1}]")
    if shards.columns[node] is None:
        raise ParamError(f"node {node} is missing")


def cmd_verify(args) -> int:
    code = codec_from_args(args)
    t0 = time.perf_counter()
    rep = verify_mds_code(code)
    payload = {"codec": repr(code), "mds": rep.ok, "checked": rep.checked,
               "failing": None if rep.failing is None else list(rep.failing),
               "wall_time": round(time.perf_counter() - t0, 6)}
    text = f"{code}: {'MDS' if rep.ok else 'NOT MDS, fails on ' + str(rep.failing)} ({rep.checked} patterns)"
    _emit(args, payload, text)
    return EXIT_OK if rep.ok else EXIT_UNCORRECTABLE


def cmd_bounds(args) -> int:
    e, r = args.e, args.r
    out = {"e": e, "r": r, "ratio_lower_bound": frac(ratio_lower_bound(e, r))}
    if args.k is not None:
        k = args.k
        d_e = args.d_e if args.d_e is not None else k + r - e
        out.update(k=k, d_e=d_e, normalized_bandwidth_bound=frac(normalized_bandwidth_bound(k, e, d_e)))
        if args.M is not None:
            out["bandwidth_lower_bound"] = frac(bandwidth_lower_bound(Fraction(args.M), k, e, d_e))
        if args.size_i is not None:
            out["ratio_upper_bound_partial"] = frac(ratio_upper_bound_partial(e, r, k, args.size_i))
        if args.alpha_size is not None and args.beta_size is not None:
            out["file_size_upper_bound"] = frac(
                file_size_upper_bound(Fraction(args.alpha_size), Fraction(args.beta_size), k, e, d_e))
    elif args.d_e is not None or args.M is not None or args.size_i is not None:
        raise ParamError("--d-e, --M and --size-i need --k")
    _emit(args, out, "\n".join(f"{key} {val}" for key, val in out.items()))
    return EXIT_OK


def cmd_ratio_sweep(args) -> int:
    code = codec_from_args(args)
    t0 = time.perf_counter()
    report = StatsReport(lower_bound=ratio_lower_bound(args.e, code.r))
    if isinstance(code, ZigzagCode):
        for entry in ratio_sweep(code, args.e, seed=args.data_seed):
            if not entry.correct:
                raise DecodeError(f"rebuild of {entry.erased} returned wrong data", entry.erased)
            report.patterns.append((entry.erased, entry.ratio))
            report.fallback |= entry.log.fallback
    else:
        if args.e != 1:
            raise ParamError("any-node sweeps cover single erasures (--e 1)")
        rng = np.random.default_rng(args.data_seed)
        cols = code.encode(code.random_info(rng)).columns()
        for node in range(code.n):
            col, log = rebuild_any(code, [None if i == node else c for i, c in enumerate(cols)], node)
            if not np.array_equal(col, cols[node]):
                raise DecodeError(f"rebuild of node {node} returned wrong data", (node,))
            report.patterns.append(((node,), log.ratio))
    report.wall_time = time.perf_counter() - t0
    lines = [f"{list(e)} {frac(r)}" for e, r in report.patterns]
    lines.append(f"average {frac(report.average)}  lower bound {frac(report.lower_bound)}")
    _emit(args, {"codec": repr(code), "e": args.e, **report.to_json()}, "\n".join(lines))
    return EXIT_OK


def _emit(args, payload: dict, text: str):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2))
    else:
        print(text)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zgz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="split a file into k data shards and r parity shards")
    p.add_argument("input", help="input file, or - for stdin")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--packing", choices=("radix", "raw"), default="radix",
                   help="radix: bytes split into base-q digits; raw: each byte is one symbol")
    _codec_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reassemble the original file")
    p.add_argument("dir")
    p.add_argument("--out", required=True, help="output file, or - for stdout")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("rebuild", help="restore missing shards and report access statistics")
    p.add_argument("dir")
    p.set_defaults(func=cmd_rebuild)

    p = sub.add_parser("scrub", help="check syndromes and correct what the decoders can")
    p.add_argument("dir")
    p.add_argument("--dry-run", action="store_true", help="report only; do not rewrite shards")
    p.set_defaults(func=cmd_scrub)

    p = sub.add_parser("corrupt", help="inject faults into a shard directory")
    p.add_argument("dir")
    p.add_argument("--cell", action="append", help="node,row[,stripe]; repeatable")
    p.add_argument("--delta", type=int, default=1, help="value added to each --cell (mod q)")
    p.add_argument("--column", action="append", type=int, help="overwrite a node with random errors")
    p.add_argument("--delete", action="append", type=int, help="delete a shard file")
    p.add_argument("--seed", type=int, default=0, help="seed for --column errors")
    p.add_argument("--scrub", action="store_true", help="scrub right after injecting")
    p.add_argument("--dry-run", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("verify", help="exhaustively check the MDS property")
    _codec_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="rebuilding ratio and bandwidth bounds")
    p.add_argument("--e", type=int, required=True, help="number of erasures")
    p.add_argument("--r", type=int, required=True, help="number of parities")
    p.add_argument("--k", type=int, default=None, help="number of systematic nodes")
    p.add_argument("--M", type=int, default=None, help="file size for the bandwidth bound")
    p.add_argument("--d-e", dest="d_e", type=int, default=None, help="helpers (default n - e)")
    p.add_argument("--size-i", dest="size_i", type=int, default=None,
                   help="|I|, helpers reading only e/r, for the partial upper bound")
    p.add_argument("--alpha-size", type=int, default=None, help="node size for the file-size bound")
    p.add_argument("--beta-size", type=int, default=None, help="per-helper transfer for the file-size bound")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ratio-sweep", help="rebuild every erasure pattern of size e and report ratios")
    p.add_argument("--e", type=int, default=1)
    p.add_argument("--data-seed", type=int, default=0, help="seed of the random test stripe")
    _codec_flags(p)
    p.set_defaults(func=cmd_ratio_sweep)

    for sp in sub.choices.values():
        sp.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error; keep main() returning codes
        return exc.code if isinstance(exc.code, int) else EXIT_PARAM
    try:
        return args.func(args)
    except UncorrectableError as exc:
        print(f"zgz: uncorrectable: {exc}", file=sys.stderr)
        return EXIT_UNCORRECTABLE
    except DecodeError as exc:
        print(f"zgz: {exc}", file=sys.stderr)
        return EXIT_UNCORRECTABLE
    except (ZigzagError, ParamError, ValueError, OSError) as exc:
        print(f"zgz: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
