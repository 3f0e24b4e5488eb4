import hashlib
import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtmsim import bdi
from rtmsim.bdi import EncodingId

ENCODINGS = [e for e in EncodingId if e is not EncodingId.UNCOMPRESSED]


def ref_size(encoding):
    """Size from the geometry alone: tag + one mask bit per element + base + deltas."""
    if encoding is EncodingId.ZEROS:
        return 4
    if encoding is EncodingId.REPEATED_VALUE:
        return 4 + 64
    base_bytes, delta_bytes = {
        EncodingId.B8D1: (8, 1),
        EncodingId.B8D2: (8, 2),
        EncodingId.B8D4: (8, 4),
        EncodingId.B4D1: (4, 1),
        EncodingId.B4D2: (4, 2),
        EncodingId.B2D1: (2, 1),
    }[encoding]
    count = 64 // base_bytes
    return 4 + count + 8 * base_bytes + count * 8 * delta_bytes


def ref_bitstring(c):
    """Bit-by-bit reference serialization built from strings."""
    s = format(int(c.encoding), "04b")
    if c.encoding is EncodingId.ZEROS:
        return s
    if c.encoding is EncodingId.REPEATED_VALUE:
        return s + format(c.base, "064b")
    base_bytes, delta_bytes = bdi.geometry(c.encoding)
    s += "".join("1" if z else "0" for z in c.zero_mask)
    s += format(c.base, f"0{8 * base_bytes}b")
    w = 8 * delta_bytes
    for d in c.deltas:
        s += format(d % (1 << w), f"0{w}b")
    return s


def words8(values):
    return struct.pack("<8Q", *values)


INCOMPRESSIBLE = hashlib.sha512(b"incompressible").digest()


@pytest.mark.parametrize("encoding", ENCODINGS)
def test_size_formula(encoding):
    assert bdi.encoding_size_bits(encoding) == ref_size(encoding)
    assert ref_size(encoding) < 512


def test_zeros_line():
    c = bdi.try_encoding(bytes(64), EncodingId.ZEROS)
    assert c is not None and c.size_bits == 4
    assert bdi.compress(bytes(64), 481).encoding is EncodingId.ZEROS
    assert bdi.compressed_size_bits(bytes(64)) == 4
    assert bdi.decompress(c) == bytes(64)


def test_repeated_value():
    v = 0xDEADBEEFCAFEF00D
    line = words8([v] * 8)
    c = bdi.try_encoding(line, EncodingId.REPEATED_VALUE)
    assert c.base == v and c.size_bits == 68
    assert bdi.compressed_size_bits(line) == 68
    assert bdi.decompress(c) == line


def test_b8d1_example():
    base = 1 << 40
    line = words8([base + i for i in range(8)])
    c = bdi.try_encoding(line, EncodingId.B8D1)
    assert c is not None
    assert c.base == base
    assert c.size_bits == 4 + 8 + 64 + 64 == 140
    assert c.deltas == tuple(range(8))
    assert not any(c.zero_mask)
    assert len(ref_bitstring(c)) == 140
    out = bdi.decompress(c)
    assert out == line
    assert struct.unpack("<8Q", out) == tuple(base + i for i in range(8))


def test_crafted_line_is_incompressible():
    for e in ENCODINGS:
        assert bdi.try_encoding(INCOMPRESSIBLE, e) is None, e
    assert bdi.compress(INCOMPRESSIBLE, 481) is None
    assert bdi.compress(INCOMPRESSIBLE, 512) is None
    assert bdi.compressed_size_bits(INCOMPRESSIBLE) == 512


def test_uniform_random_lines_rarely_compress():
    rng = random.Random(5)
    hits = sum(bdi.compress(rng.randbytes(64), 481) is not None for _ in range(2000))
    assert hits == 0


def make_b4d2_b8d4_line():
    # 4-byte halves sit near 0xFFFF0000 or near zero; 8-byte values differ by more than 16 bits
    hi = 0xFFFF1000
    lows = [0xFFFF0000, 0x100, 0xFFFF0123, 0x7, 0xFFFF7000, 0x0, 0xFFFF0000, 0x42]
    return words8([((hi + (i & 1)) << 32) | lo for i, lo in enumerate(lows)])


def test_minimum_size_wins():
    line = make_b4d2_b8d4_line()
    ok = {e for e in ENCODINGS if bdi.try_encoding(line, e) is not None}
    assert ok == {EncodingId.B4D2, EncodingId.B8D4}
    assert bdi.encoding_size_bits(EncodingId.B4D2) == 4 + 16 + 32 + 256
    assert bdi.encoding_size_bits(EncodingId.B8D4) == 4 + 8 + 64 + 256
    c = bdi.compress(line, 481)
    assert c.encoding is EncodingId.B4D2
    assert bdi.decompress(c) == line
    # a budget below B4D2 but above nothing leaves the line uncompressed
    assert bdi.compress(line, 307) is None


def test_zero_base_mask():
    # mix of small values (zero base) and values near a large base
    big = 0x7F00000000000000
    values = [3, big, big + 5, 0xFFFFFFFFFFFFFFFE, big - 100, 0, 100, big + 127]
    line = words8(values)
    c = bdi.try_encoding(line, EncodingId.B8D1)
    assert c is not None
    assert c.base == big
    assert c.zero_mask == (True, False, False, True, False, True, True, False)
    assert c.deltas[3] == -2
    assert bdi.decompress(c) == line


def test_tie_broken_by_declaration_order():
    assert bdi.encoding_size_bits(EncodingId.B4D2) == bdi.encoding_size_bits(EncodingId.B2D1)
    order = bdi._BY_SIZE
    assert order.index(EncodingId.B4D2) < order.index(EncodingId.B2D1)


def test_pack_matches_reference_bitstring():
    rng = random.Random(11)
    for _ in range(300):
        line = structured_line(rng)
        c = bdi.compress(line, 512)
        if c is None:
            continue
        value = bdi.pack(c)
        ref = ref_bitstring(c)
        assert len(ref) == c.size_bits
        assert value == int(ref, 2)
        assert bdi.unpack(value, c.size_bits) == c


def test_unpack_rejects_corruption():
    c = bdi.compress(words8([(1 << 40) + i for i in range(8)]), 512)
    value = bdi.pack(c)
    with pytest.raises(bdi.CorruptLineError):
        bdi.unpack(value, c.size_bits + 1)
    bad_tag = (0xF << (c.size_bits - 4)) | (value & ((1 << (c.size_bits - 4)) - 1))
    with pytest.raises(bdi.CorruptLineError):
        bdi.unpack(bad_tag, c.size_bits)
    # tag changed to a class with a different size
    other = (int(EncodingId.B8D2) << (c.size_bits - 4)) | (value & ((1 << (c.size_bits - 4)) - 1))
    with pytest.raises(bdi.CorruptLineError):
        bdi.unpack(other, c.size_bits)


def test_decompress_rejects_malformed():
    with pytest.raises(bdi.CorruptLineError):
        bdi.decompress(bdi.CompressedLine(EncodingId.B8D1, base=1, deltas=(1,) * 7, zero_mask=(False,) * 7))
    with pytest.raises(bdi.CorruptLineError):
        bdi.decompress(bdi.CompressedLine(EncodingId.B8D1, base=1, deltas=(300,) * 8, zero_mask=(False,) * 8))
    with pytest.raises(bdi.CorruptLineError):
        bdi.decompress(bdi.CompressedLine(EncodingId.UNCOMPRESSED))


def test_bad_inputs():
    with pytest.raises(ValueError):
        bdi.try_encoding(bytes(63), EncodingId.ZEROS)
    with pytest.raises(ValueError):
        bdi.try_encoding(bytes(64), EncodingId.UNCOMPRESSED)
    with pytest.raises(ValueError):
        bdi.compress(bytes(64), 0)
    with pytest.raises(ValueError):
        bdi.compress(bytes(64), 513)


def structured_line(rng: random.Random) -> bytes:
    kind = rng.randrange(6)
    if kind == 0:
        return bytes(64)
    if kind == 1:
        return words8([rng.getrandbits(64)] * 8)
    if kind == 2:
        width = rng.choice([8, 16, 32])
        base = rng.getrandbits(64)
        vals = [base] + [(base + rng.randrange(-(1 << (width - 1)), 1 << (width - 1))) % (1 << 64) for _ in range(7)]
        vals = [v if rng.random() < 0.8 else rng.randrange(-100, 100) % (1 << 64) for v in vals]
        return words8(vals)
    if kind == 3:
        base = rng.getrandbits(32)
        vals = [(base + rng.randrange(-128, 128)) % (1 << 32) for _ in range(16)]
        return struct.pack("<16I", *vals)
    if kind == 4:
        base = rng.getrandbits(16)
        vals = [(base + rng.randrange(-128, 128)) % (1 << 16) for _ in range(32)]
        return struct.pack("<32H", *vals)
    return rng.randbytes(64)


def test_roundtrip_structured_sample():
    rng = random.Random(3)
    for _ in range(3000):
        line = structured_line(rng)
        c = bdi.compress(line, 481)
        if c is not None:
            assert c.size_bits <= 481
            assert bdi.decompress(c) == line


@settings(max_examples=300, deadline=None)
@given(st.binary(min_size=64, max_size=64), st.integers(min_value=1, max_value=512))
def test_budget_respected(line, budget):
    c = bdi.compress(line, budget)
    if c is not None:
        assert c.size_bits <= budget
        assert bdi.decompress(c) == line


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 5), st.integers(0, 2**32), st.integers(1, 512), st.integers(0, 512))
def test_monotone_in_budget(kind, seed, b1, extra):
    line = structured_line(random.Random(seed * 7 + kind))
    c1 = bdi.compress(line, b1)
    if c1 is not None:
        assert bdi.compress(line, min(512, b1 + extra)) == c1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_serialization_width(seed):
    line = structured_line(random.Random(seed))
    c = bdi.compress(line, 512)
    if c is not None:
        assert bdi.pack(c) >> c.size_bits == 0
        assert len(ref_bitstring(c)) == c.size_bits
