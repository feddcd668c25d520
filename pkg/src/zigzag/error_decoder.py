"""Error correction for zigzag codes beyond plain erasure decoding.

Two decoders are provided:

* ``correct_erasure_plus_element``: r = 2, one erased systematic column t
  and at most one wrong element in another systematic column.
* ``correct_node_error``: no erasures, at most one column (any number of
  its elements) wrong.

Syndrome sign conventions follow the two decoders: with an excluded column
S_l is *recomputed minus observed* (so S_0 = -a_t on a clean array); with
every column present S_l is *observed minus recomputed* (so a systematic
error E in column j gives S_0 = -E).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .exceptions import DecodeError, DimensionError, UncorrectableError
from .linear import ArrayCode, CodeWordArray, check_columns, decode_columns
from .rebuild import rebuild_single
from .rowspace import RVec, vec_to_int
from .zigzag import ZigzagCode


@dataclass
class SyndromeSet:
    S: np.ndarray  # r x p
    erased: int | None = None

    @property
    def r(self) -> int:
        return self.S.shape[0]

    def __getitem__(self, l: int) -> np.ndarray:
        return self.S[l]

    @property
    def nonzero(self) -> list[int]:
        return [l for l in range(self.r) if np.any(self.S[l])]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.S)


@dataclass
class Diagnosis:
    kind: str  # clean | parity_error | element_error | node_error | uncorrectable
    corrected: CodeWordArray | None = None
    column: int | None = None
    row: int | None = None
    magnitude: int | None = None
    error_vector: np.ndarray | None = None
    erased: int | None = None
    reason: str = ""
    details: dict = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.kind != "uncorrectable"

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.column is not None:
            out["location"] = {"column": self.column}
            if self.row is not None:
                out["location"]["row"] = self.row
        if self.magnitude is not None:
            out["magnitude"] = int(self.magnitude)
        if self.error_vector is not None:
            out["error_vector"] = [int(x) for x in self.error_vector]
        if self.erased is not None:
            out["erased"] = self.erased
        if self.reason:
            out["reason"] = self.reason
        out.update(self.details)
        return out


def _columns(code: ArrayCode, columns) -> list:
    if hasattr(columns, "columns") and callable(columns.columns):
        columns = columns.columns()
    return check_columns(code, columns)


def syndromes(code: ArrayCode, columns, erased: int | None = None) -> SyndromeSet:
    """Parity syndromes of an observed array.

    ``erased`` names a systematic column to leave out of the recomputation
    (its entry in ``columns`` may be None).  All parity columns must be present.
    """
    cols = _columns(code, columns)
    missing = [i for i, c in enumerate(cols) if c is None and i != erased]
    if missing:
        raise DimensionError(f"columns {missing} are missing")
    if erased is not None and not 0 <= erased < code.k:
        raise DimensionError(f"excluded column {erased} is not systematic")
    f = code.field
    info = np.stack([np.zeros(code.p, dtype=np.int64) if c is None else c
                     for c in cols[:code.k]], axis=-1)
    skip = frozenset() if erased is None else frozenset([erased])
    S = np.empty((code.r, code.p), dtype=np.int64)
    for l in range(code.r):
        recomputed = code.parity_column(l, info, skip)
        observed = cols[code.k + l]
        S[l] = f.sub(recomputed, observed) if erased is not None else f.sub(observed, recomputed)
    return SyndromeSet(S, erased)


def _is_codeword(code: ArrayCode, word: CodeWordArray) -> bool:
    return np.array_equal(code.encode(word.info).parity, word.parity)


# ---------------------------------------------------------------------------
# Erasure + element error (r = 2)
# ---------------------------------------------------------------------------


def correct_erasure_plus_element(code: ZigzagCode, columns, t: int) -> Diagnosis:
    """Recover erased systematic column t despite one wrong systematic element.

    Raises UncorrectableError when the syndromes match no single-element
    hypothesis or the corrected array is not a codeword.
    """
    if not isinstance(code, ZigzagCode) or code.r != 2:
        raise DimensionError("erasure-plus-error decoding needs a zigzag code with r = 2")
    if not code.distinct_vectors:
        raise DimensionError("erasure-plus-error decoding needs pairwise distinct vectors in T")
    cols = _columns(code, columns)
    if not 0 <= t < code.k:
        raise DimensionError(f"erased column {t} is not systematic")
    f = code.field
    syn = syndromes(code, cols, erased=t)
    S0, S1 = syn[0], syn[1]
    B = code.coeffs[t, 1]
    X = f.mul(B, S0)
    Y = S1[code.f(t, 1)]
    W = f.sub(X, Y)
    info = np.stack([np.zeros(code.p, dtype=np.int64) if c is None else c.copy()
                     for c in cols[:code.k]], axis=-1)
    parity = np.stack(cols[code.k:], axis=-1)
    info[:, t] = f.neg(S0)
    trace = {"W": [int(w) for w in W]}

    def fail(reason):
        diag = Diagnosis("uncorrectable", erased=t, reason=reason, details=trace)
        raise UncorrectableError(reason, diag)

    support = np.flatnonzero(W)
    if support.size == 0:
        word = CodeWordArray(info, parity)
        if not _is_codeword(code, word):
            fail("syndromes are consistent with no error but the array is not a codeword")
        return Diagnosis("clean", word, erased=t)
    if support.size != 2:
        fail(f"W has {support.size} nonzero entries; a single element error gives exactly 2")
    r1, r2 = (int(x) for x in support)
    target = r1 ^ r2 ^ vec_to_int(code.T[t])
    hits = [j for j, v in enumerate(code.T) if vec_to_int(v) == target and j != t]
    if len(hits) != 1:
        fail(f"rows {r1}, {r2} identify no unique error column")
    j = hits[0]
    ratio = f.div(W[r1], W[r2])
    row_r1 = ratio == f.neg(f.div(code.coeffs[t, 1, r1], code.coeffs[j, 1, r1]))
    row_r2 = ratio == f.neg(f.div(code.coeffs[j, 1, r2], code.coeffs[t, 1, r2]))
    if row_r1 and row_r2:
        fail("both row hypotheses fit; the coefficient table is not MDS")
    if not (row_r1 or row_r2):
        fail(f"w_{r1}/w_{r2} fits neither row hypothesis")
    row = r1 if row_r1 else r2
    e = f.div(W[row], code.coeffs[t, 1, row])
    info[row, j] = f.sub(info[row, j], e)
    info[row, t] = f.add(info[row, t], e)
    word = CodeWordArray(info, parity)
    if not _is_codeword(code, word):
        fail("corrected array is not a codeword")
    return Diagnosis("element_error", word, column=j, row=row, magnitude=int(e), erased=t,
                     details=trace)


# ---------------------------------------------------------------------------
# Whole-node error
# ---------------------------------------------------------------------------


def _identity_parity0(code: ArrayCode) -> bool:
    return isinstance(code, ZigzagCode)


def correct_node_error(code: ArrayCode, columns) -> Diagnosis:
    """Locate and repair a single wrong column among fully present columns.

    Zigzag codes use the syndrome test P_j S_0 = S_1; codes whose parity 0
    is not the plain row sum fall back to trial erasure of each column.
    """
    cols = _columns(code, columns)
    if any(c is None for c in cols):
        raise DimensionError("node-error decoding needs every column present")
    f = code.field
    syn = syndromes(code, cols)
    info = np.stack(cols[:code.k], axis=-1)
    parity = np.stack(cols[code.k:], axis=-1)
    observed = CodeWordArray(info, parity)
    nz = syn.nonzero
    if not nz:
        return Diagnosis("clean", observed)
    if len(nz) == 1:
        l = nz[0]
        fixed = parity.copy()
        fixed[:, l] = f.sub(parity[:, l], syn[l])
        word = CodeWordArray(info, fixed)
        return Diagnosis("parity_error", word, column=code.k + l, error_vector=syn[l])
    if _identity_parity0(code):
        hits = [j for j in range(code.k) if np.array_equal(code.apply(1, j, syn[0]), syn[1])]
        if len(hits) != 1:
            reason = ("no systematic column explains the syndromes" if not hits
                      else f"columns {hits} all explain the syndromes")
            raise UncorrectableError(reason, Diagnosis("uncorrectable", reason=reason))
        j = hits[0]
        fixed = info.copy()
        fixed[:, j] = f.add(info[:, j], syn[0])
        word = CodeWordArray(fixed, parity)
        if not _is_codeword(code, word):
            reason = f"correcting column {j} leaves a non-codeword; more than one column is wrong"
            raise UncorrectableError(reason, Diagnosis("uncorrectable", reason=reason))
        return Diagnosis("node_error", word, column=j, error_vector=f.sub(info[:, j], fixed[:, j]))
    return _node_error_by_trial(code, cols)


def _node_error_by_trial(code: ArrayCode, cols: list) -> Diagnosis:
    f = code.field
    candidates = []
    for j in range(code.k):
        trial = [None if i == j else c for i, c in enumerate(cols)]
        try:
            candidates.append((j, decode_columns(code, trial)))
        except DecodeError:
            continue
    if len(candidates) != 1:
        reason = ("no single column explains the syndromes" if not candidates
                  else f"columns {[j for j, _ in candidates]} all explain the syndromes")
        raise UncorrectableError(reason, Diagnosis("uncorrectable", reason=reason))
    j, word = candidates[0]
    return Diagnosis("node_error", word, column=j, error_vector=f.sub(cols[j], word.info[:, j]))


# ---------------------------------------------------------------------------
# Extensions
# ---------------------------------------------------------------------------


def multi_element_correctable(T: Sequence[RVec], t: int, j: int, R) -> bool:
    """Whether errors at rows R of column j stay locatable while column t is erased (r = 2).

    (ii) no two rows of R are paired by the shift v_j + v_t, and
    (i) the flagged rows F = R u (R + v_j + v_t) are not closed under the
    shift v_i + v_t of any other column i, so column j is the only
    explanation.
    """
    T = list(T)
    if T[0].r != 2:
        raise ValueError("the multi-element criterion is stated for r = 2")
    if t == j or not (0 <= t < len(T) and 0 <= j < len(T)):
        raise ValueError(f"need distinct columns in [0, {len(T) - 1}], got t={t}, j={j}")
    R = {int(x) for x in R}
    if not R:
        return True
    shift = vec_to_int(T[j]) ^ vec_to_int(T[t])
    if any((a ^ shift) in R for a in R):
        return False
    F = R | {a ^ shift for a in R}
    for i in range(len(T)):
        if i in (j, t):
            continue
        d = vec_to_int(T[i]) ^ vec_to_int(T[t])
        if {a ^ d for a in F} == F:
            return False
    return True


@dataclass
class DoubleRebuild:
    consistent: bool
    first: np.ndarray
    second: np.ndarray
    logs: tuple
    mismatched_rows: tuple[int, ...]


def detect_by_double_rebuild(code: ZigzagCode, columns, node: int) -> DoubleRebuild:
    """Rebuild one erased systematic node twice from different parity assignments.

    A mismatch proves an element error somewhere in the accessed data; a
    match is only evidence of consistency, not a guarantee.
    """
    if code.is_parity(node):
        raise DimensionError("double rebuild compares systematic rebuilds only")
    a, log_a = rebuild_single(code, columns, node, shift=0)
    b, log_b = rebuild_single(code, columns, node, shift=1)
    diff = tuple(int(x) for x in np.flatnonzero(a != b))
    return DoubleRebuild(not diff, a, b, (log_a, log_b), diff)
