"""Zigzag codes: construction, coefficients, encoding, decoding, MDS checks.

Systematic node j is generated by a vector v_j in Z_r^m and parity l
combines, in its row t, the elements a_{i,j} with i + l*v_j = t.  Parity 0
is therefore the plain row sum.  The coefficient of a_{i,j} in parity l is
``coeffs[j, l, i]``.
"""

from __future__ import annotations

from math import gcd
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import CodeConstructionError, SearchExhaustedError
from .field import Field, field_new
from .linear import (
    ArrayCode, CodeWordArray, Layer, MAX_ROWS, MdsReport, decode_columns, verify_mds_code,
)
from .rowspace import RVec, dots_with, perm_table

DEFAULT_FIELD = {2: 3, 3: 4}


class ZigzagCode(ArrayCode):
    construction_id = 1

    def __init__(self, r: int, m: int, T: Sequence[RVec], field: Field, coeffs: np.ndarray,
                 provenance: dict | None = None, zero_node: int | None = None):
        self.m = m
        self.T = tuple(T)
        self.coeffs = np.asarray(coeffs, dtype=np.int64)
        self.coeffs.setflags(write=False)
        self.provenance = provenance or {"kind": "explicit"}
        self.zero_node = zero_node
        p = r**m
        perms = [[perm_table(v, l) for l in range(r)] for v in self.T]
        self._forward = perms
        layers = []
        for l in range(r):
            row = []
            for j, v in enumerate(self.T):
                src = perm_table(v, (-l) % r)
                row.append((Layer(src, self.coeffs[j, l][src]),))
            layers.append(tuple(row))
        super().__init__(field, len(self.T), r, p, tuple(layers))

    def f(self, j: int, l: int) -> np.ndarray:
        """The permutation f_j^l as an array: info row i lands on parity row f[i]."""
        return self._forward[j][l % self.r]

    def zigzag_set(self, l: int, t: int) -> list[tuple[int, int]]:
        """(row, node) pairs of the info elements combined in row t of parity l."""
        return [(int(np.flatnonzero(self.f(j, l) == t)[0]), j) for j in range(self.k)]

    @property
    def distinct_vectors(self) -> bool:
        return len(set(self.T)) == len(self.T)

    def descriptor(self) -> dict:
        d = {
            "construction": 1,
            "r": self.r,
            "m": self.m,
            "k": self.k,
            "q": self.field.q,
            "poly": self.field.poly,
            "T": [list(v.digits) for v in self.T],
            "zero_node": self.zero_node,
            "provenance": dict(self.provenance),
        }
        if self.provenance.get("kind") == "explicit":
            d["coeffs"] = self.coeffs.tolist()
        return d

    def __repr__(self):
        return f"ZigzagCode(r={self.r}, m={self.m}, k={self.k}, {self.field})"


def _check_T(r: int, m: int, T: Sequence[RVec]):
    if r < 2 or m < 1:
        raise CodeConstructionError(f"need r >= 2 and m >= 1, got r={r}, m={m}")
    if r**m > MAX_ROWS:
        raise CodeConstructionError(f"r^m = {r**m} exceeds the cap of {MAX_ROWS}")
    if not T:
        raise CodeConstructionError("T must contain at least one vector")
    for v in T:
        if (v.r, v.m) != (r, m):
            raise CodeConstructionError(f"vector {v} is not in Z_{r}^{m}")
        if v.is_zero():
            continue
        if gcd(*v.digits, r) != 1:
            raise CodeConstructionError(f"gcd condition fails for {v}")
    if sum(v.is_zero() for v in T) > 1:
        raise CodeConstructionError("at most one zero vector is allowed in T")


def lambda_table(r: int, m: int, field: Field, lambdas: Sequence[int]) -> np.ndarray:
    """Coefficients of a per-node scalar assignment: node j, parity l gets lambda_j^l."""
    p = r**m
    out = np.ones((len(lambdas), r, p), dtype=np.int64)
    for j, lam in enumerate(lambdas):
        for l in range(r):
            out[j, l, :] = field.pow(int(lam), l)
    return out


def build_general(r: int, m: int, T: Sequence[RVec], field: Field, coeffs,
                  provenance: dict | None = None) -> ZigzagCode:
    """General zigzag code.

    ``coeffs`` is either a full (k, r, r^m) table or a length-k sequence of
    per-node scalars lambda_j (parity l then uses lambda_j^l).
    """
    T = list(T)
    _check_T(r, m, T)
    arr = np.asarray(coeffs, dtype=np.int64)
    if arr.ndim == 1:
        if arr.size != len(T):
            raise CodeConstructionError(f"need {len(T)} node coefficients, got {arr.size}")
        if np.any(arr <= 0) or np.any(arr >= field.q):
            raise CodeConstructionError(f"node coefficients must be nonzero elements of {field}")
        arr = lambda_table(r, m, field, arr.tolist())
    if arr.shape != (len(T), r, r**m):
        raise CodeConstructionError(f"coefficient table must be {(len(T), r, r**m)}, got {arr.shape}")
    if np.any(arr >= field.q) or np.any(arr < 0):
        raise CodeConstructionError(f"coefficients outside {field}: field too small for this assignment")
    if np.any(arr == 0):
        raise CodeConstructionError("all coefficients must be nonzero")
    if np.any(arr[:, 0, :] != 1):
        raise CodeConstructionError("parity 0 must be the plain row sum (coefficients 1)")
    zero = next((j for j, v in enumerate(T) if v.is_zero()), None)
    return ZigzagCode(r, m, T, field, arr, provenance, zero)


def optimal_vectors(r: int, m: int) -> list[RVec]:
    """T = {e_0, e_1, ..., e_m} with e_0 the zero vector."""
    return [RVec.unit(r, m, i) for i in range(m + 1)]


def closed_form_coefficients(r: int, m: int, field: Field) -> np.ndarray:
    """Coefficient table for the optimal code with r in {2, 3}.

    Node j >= 1 multiplies its element in row x by c (the primitive element)
    when x . (e_1 + ... + e_j) = 0 and by 1 otherwise; parity l composes that
    rule along the l steps x, x + e_j, ..., x + (l-1) e_j.  Node 0 uses 1
    for r = 2 and c for r = 3.
    """
    if r not in (2, 3):
        raise CodeConstructionError("closed-form coefficients exist only for r in {2, 3}")
    c = field.primitive
    p = r**m
    out = np.ones((m + 1, r, p), dtype=np.int64)
    base0 = np.full(p, 1 if r == 2 else c, dtype=np.int64)
    for j in range(m + 1):
        if j == 0:
            base = base0
        else:
            sigma = RVec(r, m, tuple(int(t < j) for t in range(m)))
            base = np.where(dots_with(sigma) == 0, c, 1)
        step = perm_table(RVec.unit(r, m, j), 1)
        pos = np.arange(p)
        acc = np.ones(p, dtype=np.int64)
        for l in range(r):
            out[j, l] = acc
            acc = field.mul(acc, base[pos])
            pos = step[pos]
    return out


def build_optimal(r: int, m: int, field: Field | None = None, coeffs=None,
                  seed: int | None = None, max_tries: int = 200) -> ZigzagCode:
    """Optimal zigzag code with T = {e_0, ..., e_m}, k = m + 1.

    r in {2, 3} uses the closed-form coefficients (default fields GF(3) and
    GF(4)).  Other r need either an explicit ``coeffs`` table or a ``seed``
    for the coefficient search.
    """
    T = optimal_vectors(r, m)
    if field is None:
        if r not in DEFAULT_FIELD:
            raise CodeConstructionError(f"r={r} needs an explicit field")
        field = field_new(DEFAULT_FIELD[r])
    if coeffs is not None:
        return build_general(r, m, T, field, coeffs)
    if r in (2, 3) and seed is None:
        return build_general(r, m, T, field, closed_form_coefficients(r, m, field),
                             {"kind": "closed-form"})
    if seed is None:
        raise CodeConstructionError(f"r={r} has no closed form; supply coeffs or a search seed")
    found = assign_coefficients_search(r, m, T, field, seed, max_tries)
    return build_general(r, m, T, field, found.coeffs,
                         {"kind": "search", "seed": seed, "tries": found.tries})


def encode(code: ArrayCode, info) -> CodeWordArray:
    return code.encode(info)


def decode_erasures(code: ArrayCode, columns: Sequence) -> CodeWordArray:
    return decode_columns(code, columns)


def verify_mds(code: ArrayCode, limit: int | None = None) -> MdsReport:
    return verify_mds_code(code, limit)


class SearchResult(NamedTuple):
    coeffs: np.ndarray
    lambdas: tuple[int, ...] | None
    seed: int
    tries: int


LAMBDA_TRIES = 50


def assign_coefficients_search(r: int, m: int, T: Sequence[RVec], field: Field, seed: int,
                               max_tries: int = 200, rebuildable: bool = True) -> SearchResult:
    """Seeded random coefficients, retried until the code is MDS.

    Tries 1..LAMBDA_TRIES draw one scalar lambda_j per node (parity l uses
    lambda_j^l); later tries draw a full random table, one nonzero
    coefficient per (node, parity >= 1, row).  The phase boundary is fixed,
    so (seed, tries) replays the same table for any larger budget.

    With ``rebuildable`` (the default) a candidate must also make every
    access-optimal rebuild system for 2 <= e < r systematic erasures
    solvable; MDS alone guarantees only e = 1 and e = r.
    """
    from .rebuild import rebuild_failures

    T = list(T)
    _check_T(r, m, T)
    rng = np.random.default_rng(seed)
    for tries in range(1, max_tries + 1):
        if tries <= LAMBDA_TRIES:
            lambdas = tuple(int(x) for x in rng.integers(1, field.q, size=len(T)))
            coeffs = lambda_table(r, m, field, lambdas)
        else:
            lambdas = None
            coeffs = rng.integers(1, field.q, size=(len(T), r, r**m))
            coeffs[:, 0, :] = 1
        code = ZigzagCode(r, m, T, field, coeffs)
        if not verify_mds(code).ok:
            continue
        if rebuildable and rebuild_failures(code):
            continue
        return SearchResult(coeffs, lambdas, seed, tries)
    raise SearchExhaustedError(
        f"no MDS assignment over {field} after {max_tries} tries (seed {seed}); use a larger field"
    )


def build_searched(r: int, m: int, T: Sequence[RVec], field: Field, seed: int = 0,
                   max_tries: int = 200) -> ZigzagCode:
    """General code over ``T`` whose per-node coefficients come from the seeded search."""
    found = assign_coefficients_search(r, m, T, field, seed, max_tries)
    return build_general(r, m, T, field, found.coeffs,
                         {"kind": "search", "seed": seed, "tries": found.tries})


def from_descriptor(d: dict) -> ZigzagCode:
    r, m, q = int(d["r"]), int(d["m"]), int(d["q"])
    field = field_new(q)
    T = [RVec(r, m, tuple(v)) for v in d["T"]]
    prov = d.get("provenance", {"kind": "explicit"})
    kind = prov.get("kind")
    if kind == "closed-form":
        if T != optimal_vectors(r, m):
            raise CodeConstructionError("closed-form coefficients need the optimal vector set")
        return build_optimal(r, m, field)
    if kind == "search":
        found = assign_coefficients_search(r, m, T, field, int(prov["seed"]),
                                           max_tries=int(prov["tries"]))
        return build_general(r, m, T, field, found.coeffs, dict(prov))
    return build_general(r, m, T, field, np.asarray(d["coeffs"]))
