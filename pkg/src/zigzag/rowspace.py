"""Row indices as vectors over Z_r^m.

A row index x in [0, r^m - 1] is identified with its base-r expansion, most
significant digit first, so with r = 3, m = 2 the index 4 is (1, 1) and
e_1 = (1, 0) is the index 3.  Zigzag permutations, dot products, spans,
cosets and orthogonal complements are all defined on that identification.
Subspace operations require prime r.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .exceptions import RowspaceError


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


@dataclass(frozen=True, order=True)
class RVec:
    r: int
    m: int
    digits: tuple[int, ...]

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        if len(digits) != self.m:
            raise RowspaceError(f"expected {self.m} digits, got {len(digits)}")
        if any(not 0 <= d < self.r for d in digits):
            raise RowspaceError(f"digits {digits} out of range for r={self.r}")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def of(cls, r: int, digits: Sequence[int]) -> "RVec":
        """Vector from digits, reducing each one mod r."""
        return cls(r, len(digits), tuple(int(d) % r for d in digits))

    @classmethod
    def zero(cls, r: int, m: int) -> "RVec":
        return cls(r, m, (0,) * m)

    @classmethod
    def unit(cls, r: int, m: int, i: int) -> "RVec":
        """e_i for i in [1, m]; e_0 is the zero vector."""
        if not 0 <= i <= m:
            raise RowspaceError(f"unit index {i} outside [0, {m}]")
        return cls(r, m, tuple(int(t == i - 1) for t in range(m)))

    @property
    def index(self) -> int:
        return vec_to_int(self)

    def _check(self, other: "RVec"):
        if (self.r, self.m) != (other.r, other.m):
            raise RowspaceError(f"vectors over Z_{self.r}^{self.m} and Z_{other.r}^{other.m}")

    def __add__(self, other: "RVec") -> "RVec":
        self._check(other)
        return RVec(self.r, self.m, tuple((a + b) % self.r for a, b in zip(self.digits, other.digits)))

    def __sub__(self, other: "RVec") -> "RVec":
        self._check(other)
        return RVec(self.r, self.m, tuple((a - b) % self.r for a, b in zip(self.digits, other.digits)))

    def __neg__(self) -> "RVec":
        return RVec(self.r, self.m, tuple(-a % self.r for a in self.digits))

    def scale(self, c: int) -> "RVec":
        return RVec(self.r, self.m, tuple((c * a) % self.r for a in self.digits))

    def __rmul__(self, c: int) -> "RVec":
        return self.scale(c)

    def is_zero(self) -> bool:
        return not any(self.digits)

    def __str__(self):
        return "(" + ",".join(map(str, self.digits)) + ")"


def _check_index(x: int, r: int, m: int):
    if not 0 <= x < r**m:
        raise RowspaceError(f"index {x} outside [0, {r**m - 1}]")


def int_to_vec(x: int, r: int, m: int) -> RVec:
    _check_index(x, r, m)
    ds = []
    for _ in range(m):
        ds.append(x % r)
        x //= r
    return RVec(r, m, tuple(reversed(ds)))


def vec_to_int(v: RVec) -> int:
    x = 0
    for d in v.digits:
        x = x * v.r + d
    return x


def zigzag_perm(v: RVec, l: int, x: int) -> int:
    """f_v^l(x) = x + l*v over Z_r."""
    _check_index(x, v.r, v.m)
    return vec_to_int(int_to_vec(x, v.r, v.m) + v.scale(l))


def perm_table(v: RVec, l: int) -> np.ndarray:
    """The permutation x -> x + l*v as an array over all r^m indices."""
    digits = all_digits(v.r, v.m)
    shifted = (digits + l * np.array(v.digits, dtype=np.int64)) % v.r
    return digits_to_index(shifted, v.r)


def dot(x: RVec, v: RVec) -> int:
    x._check(v)
    return sum(a * b for a, b in zip(x.digits, v.digits)) % x.r


@lru_cache(maxsize=64)
def all_digits(r: int, m: int) -> np.ndarray:
    """(r^m, m) array whose row x is the digit vector of x."""
    idx = np.arange(r**m)
    out = np.zeros((r**m, m), dtype=np.int64)
    for pos in range(m - 1, -1, -1):
        out[:, pos] = idx % r
        idx = idx // r
    out.setflags(write=False)
    return out


def digits_to_index(digits: np.ndarray, r: int) -> np.ndarray:
    m = digits.shape[-1]
    weights = r ** np.arange(m - 1, -1, -1)
    return (digits * weights).sum(axis=-1)


def dots_with(v: RVec) -> np.ndarray:
    """x . v for every row index x, as an array of length r^m."""
    return (all_digits(v.r, v.m) @ np.array(v.digits, dtype=np.int64)) % v.r


# ---------------------------------------------------------------------------
# Subspaces over F_r (prime r)
# ---------------------------------------------------------------------------


def _require_prime(r: int):
    if not is_prime(r):
        raise RowspaceError(f"subspace operations need prime r, got r={r}")


@dataclass(frozen=True)
class Subspace:
    r: int
    m: int
    basis: tuple[RVec, ...]
    elements: tuple[int, ...]

    def __contains__(self, item) -> bool:
        x = item.index if isinstance(item, RVec) else int(item)
        return x in self._members

    @property
    def _members(self) -> frozenset:
        cached = self.__dict__.get("_member_set")
        if cached is None:
            cached = frozenset(self.elements)
            object.__setattr__(self, "_member_set", cached)
        return cached

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[RVec]:
        return [int_to_vec(x, self.r, self.m) for x in self.elements]


def _reduce_basis(vectors: list[RVec], r: int, m: int) -> list[RVec]:
    """Independent subset of ``vectors`` spanning the same space (greedy in order)."""
    basis: list[RVec] = []
    rows: list[list[int]] = []
    pivots: list[int] = []
    for v in vectors:
        row = list(v.digits)
        for prow, pc in zip(rows, pivots):
            if row[pc]:
                f = row[pc]
                row = [(a - f * b) % r for a, b in zip(row, prow)]
        nz = [i for i, a in enumerate(row) if a]
        if not nz:
            continue
        pc = nz[0]
        inv = pow(row[pc], r - 2, r)
        row = [(a * inv) % r for a in row]
        for i, prow in enumerate(rows):
            if prow[pc]:
                f = prow[pc]
                rows[i] = [(a - f * b) % r for a, b in zip(prow, row)]
        rows.append(row)
        pivots.append(pc)
        basis.append(v)
    return basis


def span(vectors: Iterable[RVec], r: int | None = None, m: int | None = None) -> Subspace:
    vectors = list(vectors)
    if vectors:
        r, m = vectors[0].r, vectors[0].m
        for v in vectors:
            vectors[0]._check(v)
    elif r is None or m is None:
        raise RowspaceError("span of no vectors needs explicit r and m")
    _require_prime(r)
    basis = _reduce_basis(vectors, r, m)
    if basis:
        b = np.array([v.digits for v in basis], dtype=np.int64)
        coeffs = np.array(list(product(range(r), repeat=len(basis))), dtype=np.int64)
        elems = digits_to_index((coeffs @ b) % r, r)
        elements = tuple(sorted(int(x) for x in elems))
    else:
        elements = (0,)
    return Subspace(r, m, tuple(basis), elements)


def cosets(z: Subspace) -> list[tuple[int, ...]]:
    """Cosets of ``z``, ordered by their smallest element."""
    _require_prime(z.r)
    n = z.r**z.m
    seen = np.zeros(n, dtype=bool)
    digits = all_digits(z.r, z.m)
    zd = digits[list(z.elements)]
    out = []
    for x in range(n):
        if seen[x]:
            continue
        members = digits_to_index((digits[x] + zd) % z.r, z.r)
        seen[members] = True
        out.append(tuple(sorted(int(y) for y in members)))
    return out


def orth_complement(s: Subspace | RVec) -> Subspace:
    """All u with u . z = 0 for every z in ``s``."""
    if isinstance(s, RVec):
        s = span([s])
    _require_prime(s.r)
    digits = all_digits(s.r, s.m)
    if s.basis:
        b = np.array([v.digits for v in s.basis], dtype=np.int64)
        ok = np.all((digits @ b.T) % s.r == 0, axis=1)
        members = [int(x) for x in np.flatnonzero(ok)]
    else:
        members = list(range(s.r**s.m))
    return span([int_to_vec(x, s.r, s.m) for x in members], s.r, s.m)


def hyperplane(u: RVec) -> Subspace:
    """(u)^perp."""
    return orth_complement(u)
