"""Binary key, signature and vector formats.

Key files start with a 24-byte header::

    magic   5s   b"PSTO1"
    kind    B    1 = public, 2 = secret
    p       <I   field characteristic
    k       B    extension degree
    modulus <I   reduction polynomial bits (0 for prime fields)
    n,m,t,s <4H
    flags   B    bit 0: block-triangular A1, bit 1: packed elements

followed by field elements in a dense canonical stream (zeros included).
Elements are 1 byte for q <= 256, 2 bytes little-endian below 65536 and
4 bytes otherwise; with the packed flag they are ceil(log2 q)-bit fields
packed little-endian.

Public stream: each polynomial's coefficients over all monomials of degree
<= 4 in canonical order; with a block-triangular A1 the first t
polynomials use the degree <= 2 monomials only.

Secret stream: A1 linear part row-major (the zero t x (m-t) block omitted
when flagged), A1 translation, A2 linear part, A2 translation, the t
quadratics of q over the y variables, then per U polynomial the vinegar
quadratic, then the oil block (n-t-s) x (1 + t + s).

Vector files: ``<I`` element count then byte-aligned elements.
"""

from __future__ import annotations

import struct
import warnings
from math import comb

import numpy as np

from .algebra import AffineBijection, FieldSpec
from .errors import BadMagic, CodecError, ParamSanity, PestoError, TruncatedStream
from .mpoly import PolySystem, monomial_basis
from .scheme import PestoParams, PestoPublicKey, PestoSecretKey, element_bits
from .twist import CentralMap

MAGIC = b"PSTO1"
KIND_PUBLIC = 1
KIND_SECRET = 2
FLAG_REDUCED = 1
FLAG_PACKED = 2
HEADER = struct.Struct("<5sBIBI4HB")
assert HEADER.size == 24


def element_width(q: int) -> int:
    if q <= 256:
        return 1
    if q < 65536:
        return 2
    return 4


def pack_elements(values: np.ndarray, q: int, packed: bool = False) -> bytes:
    v = np.asarray(values, dtype=np.int64).ravel()
    if not packed:
        w = element_width(q)
        return v.astype({1: "<u1", 2: "<u2", 4: "<u4"}[w]).tobytes()
    bits = max(1, (q - 1).bit_length())
    planes = ((v[:, None] >> np.arange(bits)) & 1).astype(np.uint8).ravel()
    return np.packbits(planes, bitorder="little").tobytes()


def unpack_elements(data: bytes, count: int, q: int, packed: bool = False) -> tuple[np.ndarray, int]:
    """Decode ``count`` elements; returns (values, bytes consumed)."""
    if not packed:
        w = element_width(q)
        need = count * w
        if len(data) < need:
            raise TruncatedStream(f"need {need} bytes, have {len(data)}")
        vals = np.frombuffer(data[:need], dtype={1: "<u1", 2: "<u2", 4: "<u4"}[w]).astype(np.int64)
    else:
        bits = max(1, (q - 1).bit_length())
        need = (count * bits + 7) // 8
        if len(data) < need:
            raise TruncatedStream(f"need {need} bytes, have {len(data)}")
        planes = np.unpackbits(np.frombuffer(data[:need], dtype=np.uint8), bitorder="little")
        planes = planes[: count * bits].reshape(count, bits).astype(np.int64)
        vals = (planes << np.arange(bits)).sum(axis=1)
    if vals.size and vals.max() >= q:
        raise ParamSanity("element value out of range for the field")
    return vals, need


def payload_size(count: int, q: int, packed: bool = False) -> int:
    if packed:
        return (count * max(1, (q - 1).bit_length()) + 7) // 8
    return count * element_width(q)


# ----------------------------------------------------------------------
def _header(kind: int, params: PestoParams, flags: int) -> bytes:
    F = params.field
    return HEADER.pack(MAGIC, kind, F.p, F.k, F.modulus if F.k > 1 else 0,
                       params.n, params.m, params.t, params.s, flags)


def _parse_header(data: bytes) -> tuple[int, PestoParams, int]:
    if len(data) < HEADER.size:
        if not data.startswith(MAGIC[: len(data)]):
            raise BadMagic("not a key file")
        raise TruncatedStream("header shorter than 24 bytes")
    magic, kind, p, k, modulus, n, m, t, s, flags = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if kind not in (KIND_PUBLIC, KIND_SECRET):
        raise BadMagic(f"unknown key kind {kind}")
    if flags & ~(FLAG_REDUCED | FLAG_PACKED):
        raise ParamSanity(f"unknown flag bits {flags:#x}")
    try:
        F = FieldSpec(p, k, modulus if k > 1 else 0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = PestoParams(F, n, m, t, s, allow_zero_vinegar=(s == 0))
    except (PestoError, ValueError) as exc:
        raise ParamSanity(f"invalid parameters in header: {exc}") from exc
    return kind, params, flags


def public_stream(pk: PestoPublicKey) -> np.ndarray:
    p = pk.params
    sys = pk.system.with_degree(4)
    if pk.reduced_a1:
        head = sys.coeffs[: p.t, : comb(p.n + 2, 2)]
        if np.any(sys.coeffs[: p.t, comb(p.n + 2, 2):]):
            raise CodecError("reduced public key has high-degree terms in its first t coordinates")
        return np.concatenate([head.ravel(), sys.coeffs[p.t :].ravel()])
    return sys.coeffs.ravel()


def secret_stream(sk: PestoSecretKey) -> np.ndarray:
    p, cm = sk.params, sk.central
    L1 = sk.A1.linear
    if sk.reduced_a1:
        a1 = np.concatenate([L1[: p.t, : p.t].ravel(), L1[p.t :].ravel()])
    else:
        a1 = L1.ravel()
    parts = [
        a1, sk.A1.translation,
        sk.A2.linear.ravel(), sk.A2.translation,
        cm.qmap.coeffs.ravel(),
    ]
    vin, oil = cm.vinegar_coeffs(), cm.oil_coeffs()
    for i in range(p.m - p.t):
        parts.append(vin[i])
        parts.append(oil[i].ravel())
    return np.concatenate([np.asarray(x, dtype=np.int64).ravel() for x in parts])


def encode_public_key(pk: PestoPublicKey, packed: bool = False) -> bytes:
    flags = (FLAG_REDUCED if pk.reduced_a1 else 0) | (FLAG_PACKED if packed else 0)
    return _header(KIND_PUBLIC, pk.params, flags) + pack_elements(public_stream(pk), pk.params.q, packed)


def encode_secret_key(sk: PestoSecretKey, packed: bool = False) -> bytes:
    flags = (FLAG_REDUCED if sk.reduced_a1 else 0) | (FLAG_PACKED if packed else 0)
    return _header(KIND_SECRET, sk.params, flags) + pack_elements(secret_stream(sk), sk.params.q, packed)


def encode_key(key: PestoPublicKey | PestoSecretKey, packed: bool = False) -> bytes:
    if isinstance(key, PestoPublicKey):
        return encode_public_key(key, packed)
    if isinstance(key, PestoSecretKey):
        return encode_secret_key(key, packed)
    raise TypeError(f"cannot encode {type(key).__name__}")


def _take(data: bytes, count: int, q: int, packed: bool) -> np.ndarray:
    vals, used = unpack_elements(data, count, q, packed)
    if used != len(data):
        raise ParamSanity(f"{len(data) - used} trailing bytes after key payload")
    return vals


def decode_key(data: bytes, expect: int | None = None) -> PestoPublicKey | PestoSecretKey:
    kind, params, flags = _parse_header(data)
    if expect is not None and kind != expect:
        raise ParamSanity(f"expected key kind {expect}, found {kind}")
    reduced, packed = bool(flags & FLAG_REDUCED), bool(flags & FLAG_PACKED)
    body = data[HEADER.size :]
    F, n, m, t, s = params.field, params.n, params.m, params.t, params.s
    if kind == KIND_PUBLIC:
        N4, N2 = comb(n + 4, 4), comb(n + 2, 2)
        count = (m - t) * N4 + t * N2 if reduced else m * N4
        vals = _take(body, count, F.q, packed)
        C = np.zeros((m, N4), dtype=np.int64)
        if reduced:
            C[:t, :N2] = vals[: t * N2].reshape(t, N2)
            C[t:] = vals[t * N2 :].reshape(m - t, N4)
        else:
            C[:] = vals.reshape(m, N4)
        return PestoPublicKey(params, PolySystem(F, monomial_basis(n, 4, F.q), C), reduced)
    # secret key
    n1 = m * m - (t * (m - t) if reduced else 0)
    Nq, Nv, O, V = comb(n - t + 2, 2), comb(t + s + 2, 2), n - t - s, t + s + 1
    count = n1 + m + n * n + n + t * Nq + (m - t) * (Nv + O * V)
    vals = _take(body, count, F.q, packed)
    pos = 0

    def nxt(k: int) -> np.ndarray:
        nonlocal pos
        out = vals[pos : pos + k]
        pos += k
        return out

    L1 = np.zeros((m, m), dtype=np.int64)
    if reduced:
        L1[:t, :t] = nxt(t * t).reshape(t, t)
        L1[t:] = nxt((m - t) * m).reshape(m - t, m)
    else:
        L1[:] = nxt(m * m).reshape(m, m)
    c1 = nxt(m)
    L2 = nxt(n * n).reshape(n, n)
    c2 = nxt(n)
    qc = nxt(t * Nq).reshape(t, Nq)
    vin = np.zeros((m - t, Nv), dtype=np.int64)
    oil = np.zeros((m - t, O, V), dtype=np.int64)
    for i in range(m - t):
        vin[i] = nxt(Nv)
        oil[i] = nxt(O * V).reshape(O, V)
    try:
        A1 = AffineBijection(F, L1, c1)
        A2 = AffineBijection(F, L2, c2)
    except ZeroDivisionError as exc:
        raise ParamSanity("affine part of the secret key is singular") from exc
    cm = CentralMap.from_blocks(F, n, m, t, s, qc, vin, oil)
    return PestoSecretKey(params, A1, A2, cm)


def decode_public_key(data: bytes) -> PestoPublicKey:
    return decode_key(data, KIND_PUBLIC)  # type: ignore[return-value]


def decode_secret_key(data: bytes) -> PestoSecretKey:
    return decode_key(data, KIND_SECRET)  # type: ignore[return-value]


def key_payload_count(data: bytes) -> int:
    """Number of field elements in a key file's payload."""
    kind, params, flags = _parse_header(data)
    from .scheme import key_counts

    pkc, skc = key_counts(params, bool(flags & FLAG_REDUCED))
    return pkc if kind == KIND_PUBLIC else skc


# ----------------------------------------------------------------------
def encode_vector(v, q: int) -> bytes:
    v = np.asarray(v, dtype=np.int64).ravel()
    return struct.pack("<I", v.size) + pack_elements(v, q)


def decode_vector(data: bytes, q: int, expect: int | None = None) -> np.ndarray:
    if len(data) < 4:
        raise TruncatedStream("vector file shorter than its length prefix")
    (count,) = struct.unpack_from("<I", data)
    vals, used = unpack_elements(data[4:], count, q)
    if 4 + used != len(data):
        raise ParamSanity("trailing bytes after vector")
    if expect is not None and count != expect:
        raise ParamSanity(f"expected a vector of length {expect}, found {count}")
    return vals


def encode_vector_list(rows, q: int) -> bytes:
    rows = np.asarray(rows, dtype=np.int64)
    out = [struct.pack("<I", rows.shape[0])]
    out += [encode_vector(r, q) for r in rows]
    return b"".join(out)


def decode_vector_list(data: bytes, q: int) -> np.ndarray:
    if len(data) < 4:
        raise TruncatedStream("list shorter than its count prefix")
    (count,) = struct.unpack_from("<I", data)
    pos, rows = 4, []
    w = element_width(q)
    for _ in range(count):
        if len(data) < pos + 4:
            raise TruncatedStream("truncated vector list")
        (k,) = struct.unpack_from("<I", data, pos)
        end = pos + 4 + k * w
        rows.append(decode_vector(data[pos:end], q))
        pos = end
    if pos != len(data):
        raise ParamSanity("trailing bytes after vector list")
    return np.array(rows, dtype=np.int64).reshape(count, -1) if rows else np.zeros((0, 0), dtype=np.int64)


def packed_sizes(params: PestoParams, reduced: bool = True) -> tuple[int, int]:
    """(public, secret) payload bytes with ceil(log2 q)-bit packing."""
    from .scheme import key_counts

    pkc, skc = key_counts(params, reduced)
    bits = element_bits(params.field)
    return (pkc * bits + 7) // 8, (skc * bits + 7) // 8
