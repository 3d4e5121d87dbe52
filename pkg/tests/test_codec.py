import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pesto import codec
from pesto.algebra import GF, make_rng
from pesto.errors import BadMagic, CodecError, ParamSanity, TruncatedStream
from pesto.scheme import PestoParams, key_counts, keygen


def test_header_layout(toy_keys):
    _, _, pk = toy_keys
    data = codec.encode_key(pk)
    magic, kind, p, k, mod, n, m, t, s, flags = struct.unpack_from("<5sBIBI4HB", data)
    assert (magic, kind, p, k, mod) == (b"PSTO1", 1, 5, 1, 0)
    assert (n, m, t, s, flags) == (5, 4, 2, 1, 0)


def test_toy_roundtrip(toy_keys):
    _, sk, pk = toy_keys
    assert codec.decode_key(codec.encode_key(pk)) == pk
    assert codec.decode_key(codec.encode_key(sk)) == sk


@pytest.mark.parametrize("spec,reduced,packed", [
    ("2^6,10,8,3,2", True, False), ("2^6,10,8,3,2", False, True), ("7,6,5,2,1", True, True),
    ("257,6,5,2,1", False, False), ("2^8,9,7,3,2", True, False),
])
def test_roundtrip_and_sizes(spec, reduced, packed):
    params = PestoParams.parse(spec)
    sk, pk = keygen(params, make_rng(5), reduced_a1=reduced)
    pkb, skb = codec.encode_key(pk, packed), codec.encode_key(sk, packed)
    assert codec.decode_public_key(pkb) == pk
    assert codec.decode_secret_key(skb) == sk
    pc, sc = key_counts(params, reduced)
    assert len(pkb) - 24 == codec.payload_size(pc, params.q, packed)
    assert len(skb) - 24 == codec.payload_size(sc, params.q, packed)
    assert codec.key_payload_count(pkb) == pc and codec.key_payload_count(skb) == sc
    if not packed:
        assert len(pkb) - 24 == pc * codec.element_width(params.q)


def test_large_public_payload():
    params = PestoParams.parse("2^6,27,25,10,2")
    pc, sc = key_counts(params, True)
    assert codec.payload_size(pc, 64) == 476035
    assert codec.packed_sizes(params, True) == ((476035 * 6 + 7) // 8, (7256 * 6 + 7) // 8)


def test_deterministic_bytes():
    params = PestoParams.parse("2^6,10,8,3,2")
    a = codec.encode_key(keygen(params, make_rng(9))[0])
    b = codec.encode_key(keygen(params, make_rng(9))[0])
    assert a == b


def test_rejections(small_keys):
    _, sk, pk = small_keys
    good = codec.encode_key(pk)
    with pytest.raises(BadMagic):
        codec.decode_key(b"XSTO1" + good[5:])
    flipped = bytearray(good)
    flipped[5] = 2
    with pytest.raises((BadMagic, ParamSanity, TruncatedStream)):
        codec.decode_key(bytes(flipped))
    flipped[5] = 9
    with pytest.raises(BadMagic):
        codec.decode_key(bytes(flipped))
    with pytest.raises(ParamSanity):
        codec.decode_secret_key(good)
    with pytest.raises(TruncatedStream):
        codec.decode_key(good[:-1])
    with pytest.raises(TruncatedStream):
        codec.decode_key(good[:10])
    with pytest.raises(ParamSanity):
        codec.decode_key(good + b"\0")
    bad_field = bytearray(good)
    bad_field[6:10] = struct.pack("<I", 4)
    with pytest.raises(ParamSanity):
        codec.decode_key(bytes(bad_field))
    bad_params = bytearray(good)
    bad_params[15:17] = struct.pack("<H", 0)  # n = 0
    with pytest.raises(ParamSanity):
        codec.decode_key(bytes(bad_params))


def test_out_of_range_element():
    params = PestoParams.parse("7,6,5,2,1")
    _, pk = keygen(params, make_rng(1))
    data = bytearray(codec.encode_key(pk))
    data[30] = 9
    with pytest.raises(ParamSanity):
        codec.decode_key(bytes(data))


def test_singular_secret_rejected():
    params = PestoParams.parse("7,6,5,2,1")
    sk, _ = keygen(params, make_rng(1), reduced_a1=False)
    data = bytearray(codec.encode_key(sk))
    data[24 : 24 + 25] = bytes(25)  # zero A1
    with pytest.raises(ParamSanity):
        codec.decode_key(bytes(data))


def test_errors_are_value_errors():
    assert issubclass(BadMagic, CodecError) and issubclass(CodecError, ValueError)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([5, 7, 64, 256, 257, 65521]), st.lists(st.integers(0, 10**6), max_size=40),
       st.booleans())
def test_element_packing_roundtrip(q, raw, packed):
    vals = np.array([v % q for v in raw], dtype=np.int64)
    data = codec.pack_elements(vals, q, packed)
    back, used = codec.unpack_elements(data, len(vals), q, packed)
    assert used == len(data) == codec.payload_size(len(vals), q, packed)
    assert np.array_equal(back, vals)


def test_vector_files():
    F = GF(257)
    v = np.array([0, 256, 3, 100])
    data = codec.encode_vector(v, F.q)
    assert data[:4] == struct.pack("<I", 4) and len(data) == 4 + 8
    assert np.array_equal(codec.decode_vector(data, F.q), v)
    with pytest.raises(ParamSanity):
        codec.decode_vector(data, F.q, expect=5)
    with pytest.raises(TruncatedStream):
        codec.decode_vector(data[:-1], F.q)
    rows = np.array([[1, 2, 3], [4, 5, 6]])
    assert np.array_equal(codec.decode_vector_list(codec.encode_vector_list(rows, 7), 7), rows)
    assert codec.decode_vector_list(codec.encode_vector_list(np.zeros((0, 3)), 7), 7).shape[0] == 0
