"""Any-node optimal code: systematic *and* parity columns rebuild at ratio 1/r.

There are k = m - 1 systematic nodes; code node ``idx`` plays the role of
unit vector e_{idx+2} (indices 2..m in the usual numbering).  Rows are
split into r blocks X_x = {v : v_1 = x}, i.e. rows x*r^{m-1} .. (x+1)*r^{m-1}-1.

Inside a block a row is named by its last m-1 digits w.  The small block
p_j sends within-block row w - e_j to row w, scaled by c (the primitive
element) when (w - e_j) . (e_2 + ... + e_j) = 0 and by 1 otherwise
(r in {2, 3}), or by a per-node lambda_j (r >= 4).  Powers p_j^s are taken
with s mod r; p_j^0 is the identity.

The big block A_j^i has p_j^{x-i} at (block row x, block column i) for
every x, and beta * p_j^{i-x} on the diagonal (x, x) for x != i, where
beta = alpha if x is in L_i and 1 otherwise.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import CodeConstructionError, RebuildError, SearchExhaustedError
from .field import Field, field_new
from .linear import (
    ArrayCode, CodeWordArray, Layer, MAX_ROWS, MdsReport, ShardReader, check_columns,
    decode_columns, solve_equations, verify_mds_code,
)
from .rowspace import RVec, all_digits, digits_to_index
from .zigzag import DEFAULT_FIELD, ZigzagCode, lambda_table

DEFAULT_LARGE_FIELD = 256


def l_set(i: int, r: int) -> frozenset:
    """L_i: the block rows of A^i whose diagonal carries alpha."""
    if r < 2:
        raise ValueError(f"need r >= 2, got {r}")
    if not 0 <= i < r:
        raise ValueError(f"index {i} outside [0, {r - 1}]")
    if r % 2:
        size = (r - 1) // 2
    else:
        size = r // 2 if i < r // 2 else r // 2 - 1
    return frozenset((i + s) % r for s in range(1, size + 1))


def small_block_coefficients(r: int, m: int, node: int, field: Field,
                             lam: int | None = None) -> np.ndarray:
    """Coefficient of p_j at each within-block source row (length r^{m-1})."""
    q = r ** (m - 1)
    if lam is not None:
        return np.full(q, lam, dtype=np.int64)
    digits = all_digits(r, m - 1)
    sigma = np.array([int(t <= node) for t in range(m - 1)], dtype=np.int64)
    return np.where((digits @ sigma) % r == 0, field.primitive, 1).astype(np.int64)


def small_block_powers(r: int, m: int, node: int, field: Field, base: np.ndarray):
    """(src, coef) of p_j^s for s = 0..r-1 on within-block rows.

    Row w of p_j^s reads row w - s*e_j with coefficient
    base(w - e_j) * base(w - 2 e_j) * ... * base(w - s e_j).
    """
    q = r ** (m - 1)
    digits = all_digits(r, m - 1)
    unit = np.zeros(m - 1, dtype=np.int64)
    unit[node] = 1
    out = []
    src = np.arange(q)
    coef = np.ones(q, dtype=np.int64)
    for s in range(r):
        out.append((src.copy(), coef.copy()))
        src = digits_to_index((digits[src] - unit) % r, r)
        coef = field.mul(coef, base[src])
    return out


class AnyNodeCode(ArrayCode):
    construction_id = 2

    def __init__(self, r: int, m: int, field: Field, alpha: int,
                 lambdas: Sequence[int] | None = None, provenance: dict | None = None):
        if m < 2:
            raise CodeConstructionError(f"need m >= 2 (k = m - 1 >= 1), got m={m}")
        if r < 2:
            raise CodeConstructionError(f"need r >= 2, got r={r}")
        p = r**m
        if p > MAX_ROWS:
            raise CodeConstructionError(f"r^m = {p} exceeds the cap of {MAX_ROWS}")
        if not 0 <= alpha < field.q or alpha in (0, 1):
            raise CodeConstructionError(f"alpha must be a field element other than 0 and 1, got {alpha}")
        if lambdas is None and r not in (2, 3):
            raise CodeConstructionError(f"r={r} needs per-node coefficients (use the search)")
        k = m - 1
        if lambdas is not None:
            lambdas = tuple(int(x) for x in lambdas)
            if len(lambdas) != k or any(not 0 < x < field.q for x in lambdas):
                raise CodeConstructionError(f"need {k} nonzero node coefficients in {field}")
        self.m = m
        self.alpha = int(alpha)
        self.lambdas = lambdas
        self.provenance = provenance or {"kind": "closed-form" if lambdas is None else "explicit"}
        self.block = r ** (m - 1)
        self.powers = []
        for j in range(k):
            base = small_block_coefficients(r, m, j, field, None if lambdas is None else lambdas[j])
            self.powers.append(small_block_powers(r, m, j, field, base))
        layers = tuple(
            tuple(self._layers(i, j, r, field) for j in range(k)) for i in range(r)
        )
        super().__init__(field, k, r, p, layers)

    def _layers(self, i: int, j: int, r: int, field: Field) -> tuple[Layer, Layer]:
        b = self.block
        col_src = np.empty(r * b, dtype=np.int64)
        col_coef = np.empty(r * b, dtype=np.int64)
        diag_src = np.zeros(r * b, dtype=np.int64)
        diag_coef = np.zeros(r * b, dtype=np.int64)
        L = l_set(i, r)
        for x in range(r):
            rows = slice(x * b, (x + 1) * b)
            src, coef = self.powers[j][(x - i) % r]
            col_src[rows] = i * b + src
            col_coef[rows] = coef
            if x != i:
                src, coef = self.powers[j][(i - x) % r]
                beta = self.alpha if x in L else 1
                diag_src[rows] = x * b + src
                diag_coef[rows] = field.mul(beta, coef)
        return Layer(col_src, col_coef), Layer(diag_src, diag_coef)

    def block_rows(self, x: int) -> np.ndarray:
        """Rows of X_x = {v : v_1 = x}."""
        return np.arange(x * self.block, (x + 1) * self.block)

    def y_rows(self, node: int) -> np.ndarray:
        """Rows of Y = {v : v . e_{node+2} = 0}."""
        digits = all_digits(self.r, self.m)
        return np.flatnonzero(digits[:, node + 1] == 0)

    def beta(self, i: int, x: int) -> int:
        """Diagonal scale of A^i in block row x."""
        return self.alpha if x in l_set(i, self.r) else 1

    def descriptor(self) -> dict:
        d = {
            "construction": 2,
            "r": self.r,
            "m": self.m,
            "k": self.k,
            "q": self.field.q,
            "poly": self.field.poly,
            "alpha": self.alpha,
            "provenance": dict(self.provenance),
        }
        if self.provenance.get("kind") == "explicit":
            d["lambdas"] = list(self.lambdas)
        return d

    def __repr__(self):
        return f"AnyNodeCode(r={self.r}, m={self.m}, k={self.k}, {self.field}, alpha={self.alpha})"


def search_lambdas(r: int, m: int, field: Field, alpha: int, seed: int,
                   max_tries: int = 200) -> tuple[tuple[int, ...], int]:
    """Seeded search for per-node coefficients.

    Each candidate is screened on the shortened zigzag code with vectors
    e_1..e_{m-1} in Z_r^{m-1} (whose MDS property carries over), then
    confirmed on the any-node code itself.
    """
    rng = np.random.default_rng(seed)
    T = [RVec.unit(r, m - 1, i) for i in range(1, m)]
    for tries in range(1, max_tries + 1):
        lambdas = tuple(int(x) for x in rng.integers(1, field.q, size=m - 1))
        short = ZigzagCode(r, m - 1, T, field, lambda_table(r, m - 1, field, lambdas))
        if not verify_mds_code(short).ok:
            continue
        if verify_mds_code(AnyNodeCode(r, m, field, alpha, lambdas)).ok:
            return lambdas, tries
    raise SearchExhaustedError(
        f"no MDS assignment over {field} after {max_tries} tries (seed {seed}); use a larger field"
    )


def build_anynode(r: int, m: int, field: Field | None = None, alpha: int | None = None,
                  seed: int | None = None, max_tries: int = 200,
                  lambdas: Sequence[int] | None = None) -> AnyNodeCode:
    """Any-node code with k = m - 1.

    r in {2, 3} uses the closed-form small blocks over GF(3) / GF(4) by
    default; r >= 4 needs explicit ``lambdas`` or runs a seeded search
    (seed 0 if none is given) over ``field`` (default GF(256)).
    """
    if field is None:
        field = field_new(DEFAULT_FIELD.get(r, DEFAULT_LARGE_FIELD))
    if alpha is None:
        alpha = field.primitive
    if lambdas is not None:
        return AnyNodeCode(r, m, field, alpha, lambdas)
    if r in (2, 3) and seed is None:
        return AnyNodeCode(r, m, field, alpha)
    seed = 0 if seed is None else seed
    found, tries = search_lambdas(r, m, field, alpha, seed, max_tries)
    return AnyNodeCode(r, m, field, alpha, found, {"kind": "search", "seed": seed, "tries": tries})


def anynode_from_descriptor(d: dict) -> AnyNodeCode:
    r, m = int(d["r"]), int(d["m"])
    field = field_new(int(d["q"]))
    alpha = int(d["alpha"])
    prov = d.get("provenance", {"kind": "closed-form"})
    if prov.get("kind") == "closed-form":
        return AnyNodeCode(r, m, field, alpha)
    if prov.get("kind") == "search":
        return build_anynode(r, m, field, alpha, seed=int(prov["seed"]), max_tries=int(prov["tries"]))
    return AnyNodeCode(r, m, field, alpha, d["lambdas"])


def encode_anynode(code: AnyNodeCode, info) -> CodeWordArray:
    return code.encode(info)


def decode_anynode(code: AnyNodeCode, columns: Sequence) -> CodeWordArray:
    return decode_columns(code, columns)


def verify_mds_anynode(code: AnyNodeCode, limit: int | None = None) -> MdsReport:
    return verify_mds_code(code, limit)


def rebuild_any(code: AnyNodeCode, columns, node: int):
    """Rebuild a single erased column; returns (column, AccessLog).

    Systematic node j reads rows Y_j of every survivor; parity i reads the
    block X_i of every survivor.
    """
    if hasattr(columns, "columns") and callable(columns.columns):
        columns = columns.columns()
    columns = check_columns(code, columns)
    if not 0 <= node < code.n:
        raise RebuildError(f"node {node} outside [0, {code.n - 1}]", (node,))
    missing = [i for i, c in enumerate(columns) if c is None and i != node]
    if missing:
        raise RebuildError(f"more than one erasure ({[node] + missing}); decode instead",
                           tuple(sorted([node] + missing)))
    reader = ShardReader(columns, erased=[node])
    if not code.is_parity(node):
        rows = set(int(x) for x in code.y_rows(node))
        recovered, _ = solve_equations(code, reader, [node], {l: rows for l in range(code.r)})
        return recovered[node], reader.log()
    return _rebuild_parity(code, reader, node - code.k), reader.log()


def _rebuild_parity(code: AnyNodeCode, reader: ShardReader, i0: int) -> np.ndarray:
    f, p, b = code.field, code.p, code.block
    rows = code.block_rows(i0)
    known = np.zeros((p, code.k), dtype=np.int64)
    for j in range(code.k):
        known[rows, j] = reader.read(j, rows)
    # A^{i0} applied to the known block: block row x holds sum_j p_j^{x-i0} a_j^{(i0)}
    out = code.parity_column(i0, known)
    for x in range(code.r):
        if x == i0:
            continue
        # parity x, block row i0 = sum_j p_j^{i0-x} a_j^{(x)} + beta * sum_j p_j^{x-i0} a_j^{(i0)}
        seen = reader.read(code.k + x, rows)
        u = f.sub(seen, code.parity_column(x, known)[rows])
        target = slice(x * b, (x + 1) * b)
        out[target] = f.add(out[target], f.mul(code.beta(i0, x), u))
    return out
