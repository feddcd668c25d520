"""On-disk shard format and byte/symbol packing.

Every shard file is a fixed little-endian header, the generator vectors of
the code (zigzag codes only), then the payload: one field symbol per
byte, one column of p = r^m symbols per stripe, stripes concatenated.

Header layout (offsets in bytes)::

     0  4s   magic "ZGZ1"
     4  u16  format version (1)
     6  u8   construction id (1 zigzag, 2 any-node)
     7  u8   r
     8  u8   m
     9  u8   k
    10  u16  q (field order)
    12  u32  field polynomial (base-q digits of the monic modulus; q for prime fields)
    16  u8   coefficient provenance (0 closed form, 1 seeded search, 2 explicit lambdas)
    17  u8   packing (0 radix, 1 raw)
    18  u16  node index
    20  u64  search seed
    28  u32  search tries
    32  u16  alpha (any-node code; 0 otherwise)
    34  u16  zero-vector node + 1 (0 if none)
    36  u32  stripe count
    40  u64  payload length in bytes
    48  u64  original input length in bytes
    56  u16  length of the vector table in bytes (k*m for zigzag codes, else 0)
    58  u16  length of the explicit-lambda table in bytes (2 per node, u16)
    60  ...  vector table: digits of v_0, v_1, ..., one byte each
         ...  lambda table
         ...  payload

Packing.  In radix mode each input byte becomes s symbols, s the least
integer with q^s >= 256 (8 for q=2, 6 for q=3, 4 for q=4 and q=5, 1 for
q=256), written most significant digit first.  In raw mode every input
byte is already a symbol and must be < q.  The symbol stream is cut into
stripes of k*p symbols; node j holds symbols j*p .. (j+1)*p - 1 of each
stripe.  The last stripe is zero padded; the original length recorded in
the header drops the padding on decode.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .anynode import AnyNodeCode
from .exceptions import ZigzagError
from .field import field_new
from .linear import ArrayCode
from .rowspace import RVec
from .zigzag import ZigzagCode, build_general, build_optimal, assign_coefficients_search, optimal_vectors

MAGIC = b"ZGZ1"
VERSION = 1
HEADER = struct.Struct("<4sHBBBBHIBBHQIHHIQQHH")
PROVENANCE = {"closed-form": 0, "search": 1, "explicit": 2}
PROVENANCE_NAME = {v: k for k, v in PROVENANCE.items()}
PACKING = {"radix": 0, "raw": 1}
PACKING_NAME = {v: k for k, v in PACKING.items()}


class ShardFormatError(ZigzagError, ValueError):
    """A shard file is malformed or inconsistent with its siblings."""


@dataclass(frozen=True)
class ShardHeader:
    construction: int
    r: int
    m: int
    k: int
    q: int
    poly: int
    provenance: str
    packing: str
    node: int
    seed: int
    tries: int
    alpha: int
    zero_node: int | None
    stripes: int
    payload_length: int
    original_length: int
    T: tuple[tuple[int, ...], ...] = ()
    lambdas: tuple[int, ...] = ()
    version: int = VERSION

    @property
    def p(self) -> int:
        return self.r**self.m

    @property
    def n(self) -> int:
        return self.k + self.r

    def pack(self) -> bytes:
        tbytes = bytes(d for v in self.T for d in v)
        lbytes = b"".join(struct.pack("<H", x) for x in self.lambdas)
        fixed = HEADER.pack(
            MAGIC, self.version, self.construction, self.r, self.m, self.k, self.q, self.poly,
            PROVENANCE[self.provenance], PACKING[self.packing], self.node, self.seed, self.tries,
            self.alpha, 0 if self.zero_node is None else self.zero_node + 1, self.stripes,
            self.payload_length, self.original_length, len(tbytes), len(lbytes),
        )
        return fixed + tbytes + lbytes

    @classmethod
    def unpack(cls, data: bytes) -> tuple["ShardHeader", int]:
        """Parse a header; returns (header, offset of the payload)."""
        if len(data) < HEADER.size:
            raise ShardFormatError("file shorter than the shard header")
        (magic, version, cons, r, m, k, q, poly, prov, packing, node, seed, tries, alpha, zero,
         stripes, plen, olen, tlen, llen) = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ShardFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ShardFormatError(f"unsupported format version {version}")
        if prov not in PROVENANCE_NAME or packing not in PACKING_NAME:
            raise ShardFormatError("unknown provenance or packing id")
        off = HEADER.size
        if len(data) < off + tlen + llen:
            raise ShardFormatError("truncated vector table")
        if tlen and (m == 0 or tlen != k * m):
            raise ShardFormatError(f"vector table of {tlen} bytes does not fit k={k}, m={m}")
        tb = data[off:off + tlen]
        T = tuple(tuple(tb[i:i + m]) for i in range(0, tlen, m))
        lb = data[off + tlen:off + tlen + llen]
        lambdas = tuple(struct.unpack(f"<{llen // 2}H", lb)) if llen else ()
        h = cls(cons, r, m, k, q, poly, PROVENANCE_NAME[prov], PACKING_NAME[packing], node, seed,
                tries, alpha, None if zero == 0 else zero - 1, stripes, plen, olen, T, lambdas,
                version)
        return h, off + tlen + llen

    def codec_key(self) -> tuple:
        """Fields that every shard of one encoding must share."""
        return replace(self, node=0)


def header_for(code: ArrayCode, node: int, stripes: int, original_length: int,
               packing: str) -> ShardHeader:
    prov = dict(code.provenance)
    kind = prov.get("kind", "explicit")
    if isinstance(code, ZigzagCode):
        if kind not in ("closed-form", "search"):
            raise ShardFormatError("explicit coefficient tables cannot be stored in shard headers")
        return ShardHeader(1, code.r, code.m, code.k, code.field.q, code.field.poly, kind, packing,
                           node, int(prov.get("seed", 0)), int(prov.get("tries", 0)), 0,
                           code.zero_node, stripes, stripes * code.p, original_length,
                           tuple(v.digits for v in code.T))
    if isinstance(code, AnyNodeCode):
        lambdas = tuple(code.lambdas) if kind == "explicit" else ()
        return ShardHeader(2, code.r, code.m, code.k, code.field.q, code.field.poly, kind, packing,
                           node, int(prov.get("seed", 0)), int(prov.get("tries", 0)), code.alpha,
                           None, stripes, stripes * code.p, original_length, (), lambdas)
    raise ShardFormatError(f"cannot store {type(code).__name__} in shard files")


def code_from_header(h: ShardHeader) -> ArrayCode:
    from .anynode import anynode_from_descriptor

    field = field_new(h.q)
    if field.poly != h.poly:
        raise ShardFormatError(f"polynomial {h.poly} is not the default modulus for GF({h.q})")
    if h.construction == 1:
        T = [RVec(h.r, h.m, v) for v in h.T]
        if h.provenance == "closed-form":
            if T != optimal_vectors(h.r, h.m):
                raise ShardFormatError("closed-form coefficients need the optimal vector set")
            code = build_optimal(h.r, h.m, field)
        elif h.provenance == "search":
            found = assign_coefficients_search(h.r, h.m, T, field, h.seed, max_tries=h.tries)
            code = build_general(h.r, h.m, T, field, found.coeffs,
                                 {"kind": "search", "seed": h.seed, "tries": h.tries})
        else:
            raise ShardFormatError("zigzag shards need closed-form or search provenance")
        if code.k != h.k:
            raise ShardFormatError(f"header says k={h.k}, vectors give {code.k}")
        return code
    if h.construction == 2:
        d = {"r": h.r, "m": h.m, "q": h.q, "alpha": h.alpha,
             "provenance": {"kind": h.provenance, "seed": h.seed, "tries": h.tries},
             "lambdas": list(h.lambdas)}
        return anynode_from_descriptor(d)
    raise ShardFormatError(f"unknown construction id {h.construction}")


# ---------------------------------------------------------------------------
# Packing
# ---------------------------------------------------------------------------


def symbols_per_byte(q: int) -> int:
    s, cap = 1, q
    while cap < 256:
        s += 1
        cap *= q
    return s


def bytes_to_symbols(data: bytes, q: int, packing: str = "radix") -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    if packing == "raw":
        if raw.size and raw.max() >= q:
            raise ShardFormatError(f"raw packing needs every byte < {q}")
        return raw
    s = symbols_per_byte(q)
    weights = q ** np.arange(s - 1, -1, -1, dtype=np.int64)
    return ((raw[:, None] // weights) % q).reshape(-1)


def symbols_to_bytes(symbols: np.ndarray, q: int, packing: str = "radix") -> bytes:
    symbols = np.asarray(symbols, dtype=np.int64)
    if packing == "raw":
        return symbols.astype(np.uint8).tobytes()
    s = symbols_per_byte(q)
    if symbols.size % s:
        raise ShardFormatError(f"symbol count {symbols.size} is not a multiple of {s}")
    weights = q ** np.arange(s - 1, -1, -1, dtype=np.int64)
    values = symbols.reshape(-1, s) @ weights
    if values.size and values.max() > 255:
        raise ShardFormatError("symbol group does not decode to a byte")
    return values.astype(np.uint8).tobytes()


def symbols_for_length(length: int, q: int, packing: str) -> int:
    return length if packing == "raw" else length * symbols_per_byte(q)


def split_stripes(symbols: np.ndarray, k: int, p: int) -> np.ndarray:
    """Zero-pad and reshape to (stripes, p, k) information arrays."""
    per = k * p
    stripes = -(-symbols.size // per)
    padded = np.zeros(stripes * per, dtype=np.int64)
    padded[:symbols.size] = symbols
    return padded.reshape(stripes, k, p).transpose(0, 2, 1)


def join_stripes(info: np.ndarray) -> np.ndarray:
    """Inverse of split_stripes (padding kept)."""
    return info.transpose(0, 2, 1).reshape(-1)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def shard_name(node: int) -> str:
    return f"shard_{node:03d}.zgz"


def write_shard(directory: Path, header: ShardHeader, column: np.ndarray):
    directory = Path(directory)
    payload = np.asarray(column, dtype=np.int64).reshape(-1)
    if payload.size != header.payload_length:
        raise ShardFormatError(f"payload has {payload.size} symbols, header says {header.payload_length}")
    (directory / shard_name(header.node)).write_bytes(header.pack() + payload.astype(np.uint8).tobytes())


def read_shard(path: Path) -> tuple[ShardHeader, np.ndarray]:
    data = Path(path).read_bytes()
    h, off = ShardHeader.unpack(data)
    payload = np.frombuffer(data[off:], dtype=np.uint8).astype(np.int64)
    if payload.size != h.payload_length:
        raise ShardFormatError(f"{path}: payload has {payload.size} bytes, header says {h.payload_length}")
    if h.payload_length != h.stripes * h.p:
        raise ShardFormatError(f"{path}: payload length is not stripes * r^m")
    if h.node >= h.n:
        raise ShardFormatError(f"{path}: node index {h.node} >= n = {h.n}")
    if payload.size and payload.max() >= h.q:
        raise ShardFormatError(f"{path}: payload symbol outside GF({h.q})")
    return h, payload


@dataclass
class ShardSet:
    """All shards found in a directory; missing nodes are None."""

    header: ShardHeader
    columns: list  # node -> (stripes, p) array or None
    directory: Path

    @property
    def missing(self) -> list[int]:
        return [i for i, c in enumerate(self.columns) if c is None]

    def stripe(self, s: int) -> list:
        return [None if c is None else c[s] for c in self.columns]


def load_shards(directory: Path) -> ShardSet:
    directory = Path(directory)
    found = {}
    key = None
    first = None
    for path in sorted(directory.glob("shard_*.zgz")):
        h, payload = read_shard(path)
        if key is None:
            key, first = h.codec_key(), h
        elif h.codec_key() != key:
            raise ShardFormatError(f"{path.name} disagrees with the other shards' headers")
        if h.node in found:
            raise ShardFormatError(f"two shards claim node {h.node}")
        found[h.node] = payload.reshape(h.stripes, h.p)
    if first is None:
        raise ShardFormatError(f"no shard files in {directory}")
    columns = [found.get(j) for j in range(first.n)]
    return ShardSet(first, columns, directory)
