"""Machinery shared by every systematic array code in the package.

A code with k systematic and r parity columns of p rows is described by
its encoding matrices E[l][j] (parity l, systematic node j), each stored as
a short list of *layers*.  A layer is a pair of length-p arrays
``(src, coef)`` meaning "row t of parity l receives coef[t] * a_j[src[t]]";
coef[t] = 0 marks an absent term.  Zigzag codes need one layer per matrix,
the any-node construction needs two.

Node numbering: systematic columns 0..k-1, then parities k..k+r-1.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import CapExceededError, DecodeError, DimensionError, SingularMatrixError
from .field import Field, row_reduce, solve_system

DEFAULT_MAX_PATTERNS = 10**6
MAX_ROWS = 4096


def max_patterns() -> int:
    return int(os.environ.get("ZGZ_MAX_PATTERNS", DEFAULT_MAX_PATTERNS))


@dataclass(frozen=True, eq=False)
class Layer:
    src: np.ndarray
    coef: np.ndarray


@dataclass(frozen=True)
class CodeWordArray:
    info: np.ndarray
    parity: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.info, self.parity], axis=-1)

    def columns(self) -> list[np.ndarray]:
        full = self.full
        return [full[..., :, c].copy() for c in range(full.shape[-1])]

    @classmethod
    def from_columns(cls, columns: Sequence[np.ndarray], k: int) -> "CodeWordArray":
        arr = np.stack([np.asarray(c, dtype=np.int64) for c in columns], axis=-1)
        return cls(arr[..., :k].copy(), arr[..., k:].copy())

    def __eq__(self, other):
        return (
            isinstance(other, CodeWordArray)
            and np.array_equal(self.info, other.info)
            and np.array_equal(self.parity, other.parity)
        )


class ArrayCode:
    """Base class: a systematic linear array code given by layered encoding matrices."""

    construction_id = 0

    def __init__(self, field: Field, k: int, r: int, p: int, layers):
        if p > MAX_ROWS:
            raise CapExceededError(f"{p} rows exceeds the desk-scale cap of {MAX_ROWS}")
        self.field = field
        self.k = k
        self.r = r
        self.p = p
        self.layers: tuple[tuple[tuple[Layer, ...], ...], ...] = layers

    @property
    def n(self) -> int:
        return self.k + self.r

    def is_parity(self, node: int) -> bool:
        return node >= self.k

    # -- encoding -----------------------------------------------------------

    def apply(self, l: int, j: int, vec: np.ndarray) -> np.ndarray:
        """E[l][j] @ vec; ``vec`` may carry leading batch axes."""
        f = self.field
        vec = np.asarray(vec, dtype=np.int64)
        out = np.zeros(vec.shape, dtype=np.int64)
        for layer in self.layers[l][j]:
            out = f.add_table[out, f.mul_table[layer.coef, vec[..., layer.src]]]
        return out

    def parity_column(self, l: int, info: np.ndarray, skip: frozenset = frozenset()) -> np.ndarray:
        acc = np.zeros(info.shape[:-1], dtype=np.int64)
        for j in range(self.k):
            if j not in skip:
                acc = self.field.add_table[acc, self.apply(l, j, info[..., j])]
        return acc

    def encode(self, info) -> CodeWordArray:
        info = np.asarray(info, dtype=np.int64)
        if info.shape[-2:] != (self.p, self.k):
            raise DimensionError(f"info must be {self.p} x {self.k}, got {info.shape}")
        if info.size and (info.min() < 0 or info.max() >= self.field.q):
            raise DimensionError(f"info entries outside {self.field}")
        parity = np.stack([self.parity_column(l, info) for l in range(self.r)], axis=-1)
        return CodeWordArray(info.copy(), parity)

    def dense(self, l: int, j: int) -> np.ndarray:
        """E[l][j] as a dense p x p matrix (row = parity row, column = info row)."""
        mat = np.zeros((self.p, self.p), dtype=np.int64)
        rows = np.arange(self.p)
        for layer in self.layers[l][j]:
            hit = layer.coef != 0
            mat[rows[hit], layer.src[hit]] = self.field.add_table[
                mat[rows[hit], layer.src[hit]], layer.coef[hit]
            ]
        return mat

    def equation_terms(self, l: int, rows: np.ndarray):
        """Terms of parity-l equations at ``rows``: yields (node, eq_pos, info_row, coef)."""
        rows = np.asarray(rows, dtype=np.int64)
        for j in range(self.k):
            for layer in self.layers[l][j]:
                coef = layer.coef[rows]
                hit = np.flatnonzero(coef)
                if hit.size:
                    yield j, hit, layer.src[rows][hit], coef[hit]

    def occurrences(self) -> np.ndarray:
        """Number of parity elements containing each info element, shape p x k."""
        counts = np.zeros((self.p, self.k), dtype=np.int64)
        for l in range(self.r):
            for j in range(self.k):
                nz = self.dense(l, j) != 0
                counts[:, j] += nz.sum(axis=0)
        return counts

    def random_info(self, rng: np.random.Generator, batch: tuple[int, ...] = ()) -> np.ndarray:
        return rng.integers(0, self.field.q, size=batch + (self.p, self.k))

    # -- decoding -----------------------------------------------------------

    def erasure_matrix(self, erased_sys: Sequence[int], parities: Sequence[int]) -> np.ndarray:
        """Coefficients of the erased systematic elements in the given parities."""
        p = self.p
        mat = np.zeros((len(parities) * p, len(erased_sys) * p), dtype=np.int64)
        for a, l in enumerate(parities):
            for b, j in enumerate(erased_sys):
                mat[a * p:(a + 1) * p, b * p:(b + 1) * p] = self.dense(l, j)
        return mat


def check_columns(code: ArrayCode, columns: Sequence) -> list:
    if len(columns) != code.n:
        raise DimensionError(f"expected {code.n} columns, got {len(columns)}")
    out = []
    for c in columns:
        if c is None:
            out.append(None)
            continue
        c = np.asarray(c, dtype=np.int64)
        if c.shape != (code.p,):
            raise DimensionError(f"column must have {code.p} entries, got shape {c.shape}")
        out.append(c)
    return out


def decode_columns(code: ArrayCode, columns: Sequence) -> CodeWordArray:
    """Recover all columns from any set of at most r erased (None) columns."""
    columns = check_columns(code, columns)
    erased = [i for i, c in enumerate(columns) if c is None]
    if len(erased) > code.r:
        raise DecodeError(f"{len(erased)} erasures exceed r={code.r}", tuple(erased))
    f = code.field
    lost_sys = [j for j in erased if j < code.k]
    if lost_sys:
        alive_par = [l for l in range(code.r) if columns[code.k + l] is not None]
        info = np.stack([c if c is not None else np.zeros(code.p, dtype=np.int64)
                         for c in columns[:code.k]], axis=-1)
        known = frozenset(lost_sys)
        rhs = np.concatenate([
            f.sub(columns[code.k + l], code.parity_column(l, info, skip=known)) for l in alive_par
        ])
        mat = code.erasure_matrix(lost_sys, alive_par)
        try:
            x = solve_system(f, mat, rhs)
        except SingularMatrixError as exc:
            raise DecodeError(f"pattern {tuple(erased)} is not decodable: {exc}", tuple(erased))
        for b, j in enumerate(lost_sys):
            info[:, j] = x[b * code.p:(b + 1) * code.p]
    else:
        info = np.stack(columns[:code.k], axis=-1)
    word = code.encode(info)
    for l in range(code.r):
        c = columns[code.k + l]
        if c is not None and not np.array_equal(c, word.parity[:, l]):
            raise DecodeError("surviving columns are not a codeword", tuple(erased))
    return word


class MdsReport(NamedTuple):
    ok: bool
    failing: tuple[int, ...] | None
    checked: int


def verify_mds_code(code: ArrayCode, limit: int | None = None) -> MdsReport:
    """Exhaustively check every erasure pattern of size r.

    A pattern is decodable iff the square block matrix of the erased
    systematic columns in the surviving parities is invertible.
    """
    limit = max_patterns() if limit is None else limit
    total = comb(code.n, code.r)
    if total > limit:
        raise CapExceededError(f"C({code.n},{code.r})={total} patterns exceed the cap {limit}")
    checked = 0
    for pattern in combinations(range(code.n), code.r):
        checked += 1
        lost_sys = [j for j in pattern if j < code.k]
        if not lost_sys:
            continue
        alive = [l for l in range(code.r) if code.k + l not in pattern]
        mat = code.erasure_matrix(lost_sys, alive)
        _, pivots, _ = row_reduce(code.field, mat)
        if len(pivots) < mat.shape[1]:
            return MdsReport(False, pattern, checked)
    return MdsReport(True, None, checked)


# ---------------------------------------------------------------------------
# Instrumented access
# ---------------------------------------------------------------------------


@dataclass
class AccessLog:
    """Rows read from each surviving node during one rebuild."""

    p: int
    n: int
    erased: tuple[int, ...]
    reads: dict
    fallback: bool = False
    note: str = ""

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.reads.values())

    @property
    def remaining(self) -> int:
        return self.p * (self.n - len(self.erased))

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.total, self.remaining)

    def rows(self, node: int) -> list[int]:
        return sorted(self.reads.get(node, ()))

    def merged(self, other: "AccessLog") -> "AccessLog":
        """Combine logs of independent stripes (counts add, row sets are kept per stripe offset)."""
        reads = {}
        for node in set(self.reads) | set(other.reads):
            a = self.reads.get(node, set())
            b = {x + self.p for x in other.reads.get(node, set())}
            reads[node] = set(a) | b
        return AccessLog(self.p + other.p, self.n, self.erased, reads,
                         self.fallback or other.fallback, self.note or other.note)

    def to_json(self) -> dict:
        ratio = self.ratio
        return {
            "erased": list(self.erased),
            "reads": {str(k): self.rows(k) for k in sorted(self.reads)},
            "total": self.total,
            "remaining": self.remaining,
            "ratio": f"{ratio.numerator}/{ratio.denominator}",
            "fallback": self.fallback,
            "note": self.note,
        }


class ShardReader:
    """Read access to surviving columns that records every row touched."""

    def __init__(self, columns: Sequence, erased: Sequence[int] | None = None):
        self._columns = [None if c is None else np.asarray(c, dtype=np.int64) for c in columns]
        if erased is None:
            erased = [i for i, c in enumerate(self._columns) if c is None]
        self.erased = tuple(sorted(erased))
        for i in self.erased:
            self._columns[i] = None
        self.p = next(c.shape[0] for c in self._columns if c is not None)
        self.reads: dict[int, set] = {}

    @property
    def n(self) -> int:
        return len(self._columns)

    def read(self, node: int, rows) -> np.ndarray:
        col = self._columns[node]
        if col is None:
            raise DecodeError(f"node {node} is erased and cannot be read")
        rows = np.asarray(rows, dtype=np.int64)
        self.reads.setdefault(node, set()).update(int(x) for x in np.unique(rows))
        return col[rows]

    def read_all(self, node: int) -> np.ndarray:
        return self.read(node, np.arange(self.p))

    def log(self, fallback: bool = False, note: str = "") -> AccessLog:
        return AccessLog(self.p, self.n, self.erased,
                         {k: set(v) for k, v in self.reads.items()}, fallback, note)


def solve_equations(code: ArrayCode, reader: ShardReader, lost: Sequence[int], equations):
    """Recover the lost systematic columns from the listed parity equations.

    ``equations`` maps parity index l to the parity rows used.  Every
    surviving element the equations mention is read through ``reader``.
    The system is split into connected components (unknowns linked by a
    shared equation) and each component is solved on its own.
    """
    f, p = code.field, code.p
    lost = list(lost)
    col_of = {j: b for b, j in enumerate(lost)}
    coo_r, coo_c, coo_v = [], [], []
    rhs_parts = []
    base = 0
    for l, rows in sorted(equations.items()):
        rows = np.asarray(sorted(rows), dtype=np.int64)
        if rows.size == 0:
            continue
        rhs = reader.read(code.k + l, rows)
        for j, pos, src, coef in code.equation_terms(l, rows):
            if j in col_of:
                coo_r.append(base + pos)
                coo_c.append(col_of[j] * p + src)
                coo_v.append(coef)
            else:
                rhs[pos] = f.sub(rhs[pos], f.mul(coef, reader.read(j, src)))
        rhs_parts.append(rhs)
        base += rows.size
    n_eq, n_unk = base, len(lost) * p
    rhs = np.concatenate(rhs_parts) if rhs_parts else np.zeros(0, dtype=np.int64)
    rr = np.concatenate(coo_r) if coo_r else np.zeros(0, dtype=np.int64)
    cc = np.concatenate(coo_c) if coo_c else np.zeros(0, dtype=np.int64)
    vv = np.concatenate(coo_v) if coo_v else np.zeros(0, dtype=np.int64)

    # bipartite graph: equations 0..n_eq-1, unknowns n_eq..n_eq+n_unk-1
    graph = coo_matrix((np.ones(rr.size), (rr, n_eq + cc)), shape=(n_eq + n_unk,) * 2)
    ncomp, label = connected_components(graph, directed=False)
    x = np.zeros(n_unk, dtype=np.int64)
    eq_label, unk_label = label[:n_eq], label[n_eq:]
    order = np.argsort(rr, kind="stable")
    rr, cc, vv = rr[order], cc[order], vv[order]
    sizes = []
    for comp in np.unique(unk_label):
        eqs = np.flatnonzero(eq_label == comp)
        unks = np.flatnonzero(unk_label == comp)
        sizes.append(len(unks))
        local_eq = {int(e): a for a, e in enumerate(eqs)}
        local_unk = {int(u): b for b, u in enumerate(unks)}
        mat = np.zeros((len(eqs), len(unks)), dtype=np.int64)
        sel = np.isin(rr, eqs)
        for e, u, v in zip(rr[sel], cc[sel], vv[sel]):
            a, b = local_eq[int(e)], local_unk[int(u)]
            mat[a, b] = f.add(mat[a, b], v)
        try:
            x[unks] = solve_system(f, mat, rhs[eqs])
        except SingularMatrixError as exc:
            raise DecodeError(f"rebuild equations for {tuple(lost)} are singular: {exc}", tuple(lost))
    return {j: x[b * p:(b + 1) * p].copy() for j, b in col_of.items()}, sizes
