"""Finite field arithmetic over GF(q), q <= 256, and dense linear algebra.

Elements are integers in [0, q-1].  For q = p^k with k > 1 an element is
the base-p encoding of a polynomial of degree < k (digit i is the
coefficient of x^i), reduced modulo a fixed monic primitive polynomial:
the smallest one, by base-p encoding, whose root x has order q-1.  For
q = 4 this is x^2 + x + 1 (id 7).

All arithmetic goes through lookup tables stored as numpy arrays, so every
operation accepts scalars or arrays of any shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .exceptions import DimensionError, FieldError, SingularMatrixError

MAX_ORDER = 256


def _prime_power(q: int) -> tuple[int, int] | None:
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            k, rest = 0, q
            while rest % p == 0:
                rest //= p
                k += 1
            return (p, k) if rest == 1 else None
    return None


def _digits(x: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(x % p)
        x //= p
    return out


def _undigits(ds, p: int) -> int:
    x = 0
    for d in reversed(ds):
        x = x * p + d
    return x


def _times_x(a: int, p: int, k: int, low: list[int]) -> int:
    """Multiply the polynomial ``a`` by x and reduce by x^k = -sum(low_i x^i)."""
    ds = _digits(a, p, k)
    top = ds[-1]
    shifted = [0] + ds[:-1]
    return _undigits([(s - top * c) % p for s, c in zip(shifted, low)], p)


def _exp_cycle(p: int, k: int, low: list[int]) -> list[int] | None:
    q = p**k
    seq, x = [], 1
    for _ in range(q - 1):
        seq.append(x)
        x = _times_x(x, p, k, low)
        if x == 1:
            break
    return seq if len(seq) == q - 1 and x == 1 else None


@dataclass(frozen=True, eq=False)
class Field:
    """GF(q) with precomputed tables.

    ``poly`` is the base-p encoding of the monic reduction polynomial
    (including the leading term), or 0 for prime fields.
    """

    q: int
    characteristic: int
    degree: int
    poly: int
    primitive: int
    add_table: np.ndarray = dc_field(repr=False)
    mul_table: np.ndarray = dc_field(repr=False)
    neg_table: np.ndarray = dc_field(repr=False)
    inv_table: np.ndarray = dc_field(repr=False)
    exp_table: np.ndarray = dc_field(repr=False)
    log_table: np.ndarray = dc_field(repr=False)

    def __eq__(self, other):
        return isinstance(other, Field) and (self.q, self.poly) == (other.q, other.poly)

    def __hash__(self):
        return hash((self.q, self.poly))

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def neg(self, a):
        return self.neg_table[a]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("zero has no inverse")
        return self.inv_table[a]

    def div(self, a, b):
        return self.mul_table[a, self.inv(b)]

    def pow(self, a: int, n: int) -> int:
        a = int(a)
        if a == 0:
            return 1 if n == 0 else 0
        return int(self.exp_table[(int(self.log_table[a]) * n) % (self.q - 1)])

    def order(self, a: int) -> int:
        """Multiplicative order of a nonzero element."""
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        n, x = 1, int(a)
        while x != 1:
            x = int(self.mul_table[x, a])
            n += 1
        return n

    def sum(self, values, axis=None):
        """Field sum along ``axis`` (all elements when axis is None)."""
        values = np.asarray(values)
        if axis is None:
            values = values.reshape(-1)
            axis = 0
        values = np.moveaxis(values, axis, 0)
        acc = np.zeros(values.shape[1:], dtype=values.dtype)
        for v in values:
            acc = self.add_table[acc, v]
        return acc

    def elements(self) -> range:
        return range(self.q)

    def nonzero(self) -> range:
        return range(1, self.q)

    def __repr__(self):
        return f"GF({self.q})"


@lru_cache(maxsize=None)
def field_new(q: int) -> Field:
    """Build (and cache) GF(q).  Raises FieldError unless q is a prime power <= 256."""
    if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
        raise FieldError(f"field order must be an integer, got {q!r}")
    q = int(q)
    if q > MAX_ORDER:
        raise FieldError(f"field order {q} exceeds {MAX_ORDER}")
    pk = _prime_power(q)
    if pk is None:
        raise FieldError(f"{q} is not a prime power")
    p, k = pk

    if k == 1:
        poly = 0
        add = (np.arange(q)[:, None] + np.arange(q)[None, :]) % p
        mul = (np.arange(q)[:, None] * np.arange(q)[None, :]) % p
        prim = next(g for g in range(1, q) if _order_mod(g, p) == q - 1)
        exp = [pow(prim, i, p) for i in range(q - 1)]
    else:
        exp = None
        for low_code in range(p**k):
            low = _digits(low_code, p, k)
            if low[0] == 0:
                continue
            exp = _exp_cycle(p, k, low)
            if exp is not None:
                poly = low_code + p**k
                break
        assert exp is not None
        prim = p  # the polynomial x
        dq = np.array([_digits(x, p, k) for x in range(q)])
        summed = (dq[:, None, :] + dq[None, :, :]) % p
        add = (summed * (p ** np.arange(k))).sum(axis=2)
        log = {x: i for i, x in enumerate(exp)}
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(1, q):
            for b in range(1, q):
                mul[a, b] = exp[(log[a] + log[b]) % (q - 1)]

    add = np.asarray(add, dtype=np.int64)
    mul = np.asarray(mul, dtype=np.int64)
    neg = np.array([int(np.nonzero(add[a] == 0)[0][0]) for a in range(q)], dtype=np.int64)
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
    exp_arr = np.array(exp, dtype=np.int64)
    log_arr = np.zeros(q, dtype=np.int64)
    log_arr[exp_arr] = np.arange(q - 1)
    for arr in (add, mul, neg, inv, exp_arr, log_arr):
        arr.setflags(write=False)
    return Field(q, p, k, poly, int(prim), add, mul, neg, inv, exp_arr, log_arr)


def _order_mod(g: int, p: int) -> int:
    n, x = 1, g % p
    while x != 1:
        x = (x * g) % p
        n += 1
    return n


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FMatrix:
    field: Field
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.int64, copy=True)
        if data.ndim != 2:
            raise DimensionError(f"matrix must be 2-D, got shape {data.shape}")
        if data.size and (data.min() < 0 or data.max() >= self.field.q):
            raise FieldError(f"matrix entries outside {self.field}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def identity(cls, field: Field, n: int) -> "FMatrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other):
        return (
            isinstance(other, FMatrix)
            and self.field == other.field
            and np.array_equal(self.data, other.data)
        )

    def __matmul__(self, other):
        if isinstance(other, FMatrix):
            return FMatrix(self.field, matmul(self.field, self.data, other.data))
        return matvec(self.field, self.data, np.asarray(other))

    def __repr__(self):
        return f"FMatrix({self.field}, {self.data.tolist()})"


def matmul(field: Field, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for t in range(a.shape[1]):
        out = field.add_table[out, field.mul_table[a[:, t, None], b[None, t, :]]]
    return out


def matvec(field: Field, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    if a.shape[1] != x.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by vector of length {x.shape[0]}")
    return field.sum(field.mul_table[a, x[None, :]], axis=1)


def row_reduce(field: Field, m: np.ndarray, ncols: int | None = None):
    """Gauss-Jordan elimination on the first ``ncols`` columns.

    Pivot choice is the lowest-indexed row with a nonzero entry.  Returns the
    reduced matrix, the pivot columns, and the determinant factor (the
    product of pivots times the sign of the row swaps), which is only
    meaningful for square inputs.
    """
    m = np.array(m, dtype=np.int64, copy=True)
    nrows = m.shape[0]
    ncols = m.shape[1] if ncols is None else ncols
    add, mul, neg = field.add_table, field.mul_table, field.neg_table
    pivots: list[int] = []
    det = 1
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nz = np.flatnonzero(m[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            m[[row, piv]] = m[[piv, row]]
            det = int(neg[det])
        pv = int(m[row, col])
        det = int(mul[det, pv])
        m[row] = mul[int(field.inv_table[pv]), m[row]]
        factors = m[:, col].copy()
        factors[row] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            m[hit] = add[m[hit], neg[mul[factors[hit, None], m[row][None, :]]]]
        pivots.append(col)
        row += 1
    return m, pivots, det


def _as_array(a) -> np.ndarray:
    return a.data if isinstance(a, FMatrix) else np.asarray(a, dtype=np.int64)


def det(a: FMatrix) -> int:
    data = a.data
    if data.shape[0] != data.shape[1]:
        raise DimensionError(f"determinant of non-square {data.shape} matrix")
    if data.shape[0] == 0:
        return 1
    _, pivots, d = row_reduce(a.field, data)
    return d if len(pivots) == data.shape[0] else 0


def rank(field: Field, a) -> int:
    data = _as_array(a)
    if data.size == 0:
        return 0
    return len(row_reduce(field, data)[1])


def solve_linear(a: FMatrix, b) -> np.ndarray:
    """Solve ``a @ x = b`` for square, invertible ``a``.

    Raises DimensionError on shape mismatch and SingularMatrixError when
    ``a`` is not invertible.
    """
    data = a.data
    if data.shape[0] != data.shape[1]:
        raise DimensionError(f"solve_linear needs a square matrix, got {data.shape}")
    return solve_system(a.field, data, b)


def solve_system(field: Field, a, b) -> np.ndarray:
    """Unique solution of a (possibly overdetermined) consistent system.

    Raises SingularMatrixError when the columns of ``a`` are dependent or
    when the system is inconsistent.
    """
    a = _as_array(a)
    b = np.asarray(b, dtype=np.int64)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"shape mismatch: matrix {a.shape}, rhs {b.shape}")
    n = a.shape[1]
    if n == 0:
        if np.any(b):
            raise SingularMatrixError("inconsistent system")
        return np.zeros(0, dtype=np.int64)
    aug = np.concatenate([a, b[:, None]], axis=1)
    red, pivots, _ = row_reduce(field, aug, n)
    if len(pivots) < n:
        raise SingularMatrixError(f"matrix has rank {len(pivots)} < {n}")
    if np.any(red[n:, n]):
        raise SingularMatrixError("inconsistent system")
    return red[:n, n].copy()
