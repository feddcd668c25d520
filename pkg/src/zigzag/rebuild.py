"""Access-optimal rebuilding of systematic erasures in zigzag codes.

For e erased systematic nodes the engine picks a helper set I and the
subspace Z spanned by the differences v_i - v_anchor over I, a dual vector
u orthogonal to Z that separates every erased node from the anchor, and the
access set X, a union of e cosets of the hyperplane (u)^perp.  Parity l is
then read at rows X + l*v_anchor and the e*r^m resulting equations are
solved.  All reads go through a ShardReader, so the reported ratio counts
exactly the elements that were touched.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .exceptions import DecodeError, RebuildError, RowspaceError
from .linear import AccessLog, ShardReader, check_columns, decode_columns, solve_equations
from .rowspace import (
    RVec, Subspace, cosets, dots_with, hyperplane, int_to_vec, is_prime, orth_complement, span,
)
from .zigzag import ZigzagCode


@dataclass
class RebuildPlan:
    erased: tuple[int, ...]
    X: tuple[int, ...]
    parity_rows: dict
    node_rows: dict
    helpers: tuple[int, ...] = ()
    anchor: int | None = None
    Z: Subspace | None = None
    u: RVec | None = None
    optimal: bool = True
    fallback: bool = False
    notes: list = dc_field(default_factory=list)

    @property
    def equations(self) -> list[tuple[int, int]]:
        return [(l, t) for l in sorted(self.parity_rows) for t in sorted(self.parity_rows[l])]

    def expected_reads(self, k: int) -> dict:
        reads = {j: set(rows) for j, rows in self.node_rows.items()}
        for l, rows in self.parity_rows.items():
            if rows:
                reads[k + l] = set(rows)
        return reads

    def to_json(self) -> dict:
        return {
            "erased": list(self.erased),
            "X": list(self.X),
            "parity_rows": {str(l): sorted(v) for l, v in sorted(self.parity_rows.items())},
            "node_rows": {str(j): sorted(v) for j, v in sorted(self.node_rows.items())},
            "helpers": list(self.helpers),
            "anchor": self.anchor,
            "u": None if self.u is None else list(self.u.digits),
            "optimal": self.optimal,
            "fallback": self.fallback,
        }


def _involved_rows(code: ZigzagCode, parity_rows: dict, lost: set) -> dict:
    node_rows: dict[int, set] = {}
    for l, rows in parity_rows.items():
        rows = np.asarray(sorted(rows), dtype=np.int64)
        if rows.size == 0:
            continue
        for j, _, src, _ in code.equation_terms(l, rows):
            if j not in lost:
                node_rows.setdefault(j, set()).update(int(x) for x in src)
    return node_rows


def _columns(code, columns) -> list:
    if hasattr(columns, "columns") and callable(columns.columns):
        columns = columns.columns()
    return check_columns(code, columns)


# ---------------------------------------------------------------------------
# Single erasure
# ---------------------------------------------------------------------------


def single_plan(code: ZigzagCode, node: int, shift: int = 0) -> RebuildPlan:
    """Row assignment for one systematic erasure.

    Rows {x : x . v_i = r - l} are rebuilt from parity l + shift; the zero
    node uses {x : x . (1,...,1) = l} instead.  Each erased element lies in
    exactly one chosen equation, so the system is always solvable.
    """
    r = code.r
    if node == code.zero_node:
        dual = RVec(r, code.m, (1,) * code.m)
        value = lambda l: l % r  # noqa: E731
    else:
        dual = code.T[node]
        value = lambda l: (r - l) % r  # noqa: E731
    dots = dots_with(dual)
    parity_rows = {}
    for l in range(r):
        rows = np.flatnonzero(dots == value(l))
        par = (l + shift) % r
        parity_rows[par] = {int(x) for x in code.f(node, par)[rows]}
    node_rows = _involved_rows(code, parity_rows, {node})
    X = tuple(sorted(parity_rows.get(0, ())))
    return RebuildPlan((node,), X, parity_rows, node_rows)


def rebuild_single(code: ZigzagCode, columns, node: int, shift: int = 0):
    """Rebuild one erased node; returns (column, AccessLog).

    A parity node cannot be rebuilt optimally by a plain zigzag code: every
    systematic element is read and the log is marked as a fallback.
    """
    columns = _columns(code, columns)
    if not 0 <= node < code.n:
        raise RebuildError(f"node {node} outside [0, {code.n - 1}]", (node,))
    reader = ShardReader(columns, erased=[node])
    if code.is_parity(node):
        info = np.stack([reader.read_all(j) for j in range(code.k)], axis=-1)
        col = code.parity_column(node - code.k, info)
        return col, reader.log(fallback=True, note="parity node: full access")
    plan = single_plan(code, node, shift)
    recovered, _ = solve_equations(code, reader, [node], plan.parity_rows)
    return recovered[node], reader.log()


# ---------------------------------------------------------------------------
# Multiple erasures
# ---------------------------------------------------------------------------


def _helpers_span_ok(T, erased, members) -> bool:
    anchor = T[members[0]]
    z = span([T[i] - anchor for i in members], anchor.r, anchor.m)
    return all((T[e] - anchor) not in z for e in erased)


def optimal_subspace(T: Sequence[RVec], erased) -> tuple[Subspace, list[int]]:
    """Greedy maximal helper set I and Z = span{v_i - v_anchor : i in I}.

    Survivors are tried in ascending index and kept while no erased vector
    difference falls into the span.  The anchor is I[0].
    """
    T = list(T)
    r, m = T[0].r, T[0].m
    if not is_prime(r):
        raise RowspaceError(f"multi-erasure planning needs prime r, got {r}")
    erased = sorted(set(erased))
    helpers: list[int] = []
    for j in range(len(T)):
        if j in erased:
            continue
        if _helpers_span_ok(T, erased, helpers + [j]):
            helpers.append(j)
    if not helpers:
        return span([], r, m), []
    anchor = T[helpers[0]]
    return span([T[i] - anchor for i in helpers], r, m), helpers


def find_u(Z: Subspace, T: Sequence[RVec], erased, anchor: int | None = None) -> RVec:
    """Smallest u in Z^perp with u . (v_i - v_anchor) != 0 for each erased i.

    The anchor defaults to the lowest surviving index; any member of the
    helper set gives the same differences modulo Z.
    """
    if anchor is None:
        anchor = next(j for j in range(len(T)) if j not in set(erased))
    diffs = [T[i] - T[anchor] for i in erased]
    for x in orth_complement(Z).elements:
        u = int_to_vec(x, Z.r, Z.m)
        if all(sum(a * b for a, b in zip(u.digits, d.digits)) % Z.r for d in diffs):
            return u
    raise RebuildError(f"no dual vector separates erased nodes {tuple(erased)}", tuple(erased))


def choose_X(X0: Subspace, e: int, directions: Sequence[RVec] = ()) -> tuple[int, ...]:
    """Union of the e cosets of X0 with the smallest representatives.

    ``directions`` are the differences v_i - v_anchor of the erased nodes;
    each must complete X0 to the whole space.
    """
    if X0.dimension != X0.m - 1:
        raise RebuildError(f"X0 must be a hyperplane, has dimension {X0.dimension}")
    for d in directions:
        if d in X0:
            raise RebuildError(f"{d} lies in X0, so X0 + span{{{d}}} is not the whole space")
    all_cosets = cosets(X0)
    if not 1 <= e <= len(all_cosets):
        raise RebuildError(f"cannot take {e} of {len(all_cosets)} cosets")
    return tuple(sorted(x for c in all_cosets[:e] for x in c))


def plan_multi(code: ZigzagCode, erased) -> RebuildPlan:
    erased = tuple(sorted(set(erased)))
    e, r, p = len(erased), code.r, code.p
    if not 1 <= e <= r:
        raise RebuildError(f"need 1 <= e <= r, got e={e}", erased)
    if any(code.is_parity(j) or j < 0 for j in erased):
        raise RebuildError("optimal planning covers systematic erasures only", erased)
    if not is_prime(r):
        raise RebuildError(f"multi-erasure rebuilding needs prime r, got {r}", erased)
    survivors = [j for j in range(code.k) if j not in erased]
    if e == r or not survivors:
        parity_rows = {l: set(range(p)) for l in range(r)}
        plan = RebuildPlan(erased, tuple(range(p)), parity_rows,
                           _involved_rows(code, parity_rows, set(erased)),
                           tuple(survivors), survivors[0] if survivors else None)
        return plan
    Z, helpers = optimal_subspace(code.T, erased)
    if not helpers:
        raise RebuildError("no helper set satisfies the separation condition", erased)
    anchor = helpers[0]
    u = find_u(Z, code.T, erased, anchor)
    X0 = hyperplane(u)
    X = choose_X(X0, e, [code.T[i] - code.T[anchor] for i in erased])
    Xarr = np.asarray(X)
    parity_rows = {l: {int(t) for t in code.f(anchor, l)[Xarr]} for l in range(r)}
    plan = RebuildPlan(erased, X, parity_rows, _involved_rows(code, parity_rows, set(erased)),
                       tuple(helpers), anchor, Z, u, optimal=len(helpers) == len(survivors))
    return plan


def rebuild_multi(code: ZigzagCode, columns, erased):
    """Rebuild erased nodes; returns ({node: column}, AccessLog).

    Systematic erasures with prime r follow the optimal plan.  Anything else
    (parity nodes involved, composite r, no separating helper set) is decoded
    with full access and the log is flagged as a fallback.
    """
    columns = _columns(code, columns)
    erased = tuple(sorted(set(erased)))
    if len(erased) > code.r:
        raise RebuildError(f"{len(erased)} erasures exceed r={code.r}", erased)
    if any(not 0 <= j < code.n for j in erased):
        raise RebuildError(f"erased nodes {erased} outside [0, {code.n - 1}]", erased)
    reader = ShardReader(columns, erased=erased)
    try:
        plan = plan_multi(code, erased)
    except (RebuildError, RowspaceError) as exc:
        return full_decode(code, reader, erased, str(exc))
    recovered, _ = solve_equations(code, reader, erased, plan.parity_rows)
    return recovered, reader.log()


def full_decode(code, reader: ShardReader, erased, note: str):
    cols = [None if j in erased else reader.read_all(j) for j in range(code.n)]
    word = decode_columns(code, cols)
    full = word.columns()
    return {j: full[j] for j in erased}, reader.log(fallback=True, note=note)


def rebuild_failures(code: ZigzagCode, sizes=None) -> list[tuple[int, ...]]:
    """Systematic erasure sets whose optimal rebuild system is singular.

    Only sets with an optimal plan (helper set I = all survivors) are
    checked; ``sizes`` defaults to 2 <= e < r, the sizes MDS does not cover.
    """
    if not is_prime(code.r):
        return []
    sizes = range(2, min(code.r, code.k + 1)) if sizes is None else sizes
    zero = [np.zeros(code.p, dtype=np.int64) for _ in range(code.n)]
    bad = []
    for e in sizes:
        for erased in combinations(range(code.k), e):
            try:
                plan = plan_multi(code, erased)
            except RebuildError:
                continue
            if not plan.optimal:
                continue
            cols = [None if j in erased else c for j, c in enumerate(zero)]
            try:
                solve_equations(code, ShardReader(cols, erased), erased, plan.parity_rows)
            except DecodeError:
                bad.append(erased)
    return bad


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


def ratio_lower_bound(e: int, r: int) -> Fraction:
    if not 1 <= e <= r:
        raise ValueError(f"need 1 <= e <= r, got e={e}, r={r}")
    return Fraction(e, r)


def bandwidth_lower_bound(M, k: int, e: int, d_e: int) -> Fraction:
    """Per-helper transmission bound e*M / (k*(d_e - k + e)) for MDS exact repair."""
    if not 1 <= e <= k:
        raise ValueError(f"need 1 <= e <= k, got e={e}, k={k}")
    if d_e < k:
        raise ValueError(f"need d_e >= k, got d_e={d_e}, k={k}")
    return Fraction(e) * Fraction(M) / (k * (d_e - k + e))


def normalized_bandwidth_bound(k: int, e: int, d_e: int) -> Fraction:
    """bandwidth_lower_bound scaled by k/M; equals e/r when d_e = n - e."""
    return bandwidth_lower_bound(1, k, e, d_e) * k


def file_size_upper_bound(alpha, beta, k: int, e: int, d_e: int) -> Fraction:
    """Largest file an exact-repair code with these node and repair sizes can store."""
    if not 1 <= e <= k or d_e < e:
        raise ValueError("need 1 <= e <= k and d_e >= e")
    s = k % e
    total = Fraction(s) * Fraction(alpha)
    for i in range(k // e):
        total += min(e * Fraction(alpha), (d_e - i * e - s) * Fraction(beta))
    return total


def ratio_upper_bound_partial(e: int, r: int, k: int, size_i: int) -> Fraction:
    """Ratio guaranteed when only |I| helpers read e/r and the rest read everything."""
    if not 1 <= e <= r:
        raise ValueError(f"need 1 <= e <= r, got e={e}, r={r}")
    if not 0 <= size_i <= k - e:
        raise ValueError(f"need 0 <= |I| <= k - e, got |I|={size_i}")
    return Fraction(e, r) + Fraction((r - e) * (k - size_i - e), r * (k + r - e))


# ---------------------------------------------------------------------------
# Property e and the threshold e*
# ---------------------------------------------------------------------------


def check_property_e(T: Sequence[RVec], e: int) -> bool:
    """True iff no erased difference u - v lies in span{w - v : w survives}, for every e-subset."""
    T = list(T)
    if not is_prime(T[0].r):
        raise RowspaceError(f"property e needs prime r, got {T[0].r}")
    for A in combinations(range(len(T)), e):
        rest = [w for i, w in enumerate(T) if i not in A]
        if not rest:
            continue
        v = rest[0]
        z = span([w - v for w in rest], v.r, v.m)
        if any((T[a] - v) in z for a in A):
            return False
    return True


def min_optimal_e(T: Sequence[RVec], r: int) -> int | None:
    for e in range(1, min(r, len(T)) + 1):
        if check_property_e(T, e):
            return e
    return None


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepEntry:
    erased: tuple[int, ...]
    ratio: Fraction
    log: AccessLog
    correct: bool


def ratio_sweep(code: ZigzagCode, e: int, seed: int = 0) -> list[SweepEntry]:
    """Rebuild every e-subset of systematic nodes on one random stripe."""
    rng = np.random.default_rng(seed)
    word = code.encode(code.random_info(rng))
    cols = word.columns()
    out = []
    for erased in combinations(range(code.k), e):
        damaged = [None if j in erased else c for j, c in enumerate(cols)]
        try:
            rec, log = rebuild_multi(code, damaged, erased)
        except DecodeError:
            raise RebuildError(f"rebuild equations for {erased} are singular", erased)
        ok = all(np.array_equal(rec[j], cols[j]) for j in erased)
        out.append(SweepEntry(erased, log.ratio, log, ok))
    return out


def average_ratio(entries: Sequence[SweepEntry]) -> Fraction:
    return sum((x.ratio for x in entries), Fraction(0)) / len(entries)
