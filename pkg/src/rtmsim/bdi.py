"""Base-Delta-Immediate compression of 64-byte cache lines.

A line is split into fixed-width elements (little-endian, like the words a
core would store). Each element is encoded as a narrow signed delta against
either an implicit zero base or a single explicit base. The packed form is
laid out most-significant-bit first as::

    [4-bit tag][mask bits][base][deltas in element order]

and is exactly ``size_bits`` long. That bit string is what the strong ECC
protects when a dirty line is stored compressed.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

LINE_BYTES = 64
LINE_BITS = LINE_BYTES * 8
TAG_BITS = 4


class CorruptLineError(ValueError):
    """A compressed payload that cannot be a valid BDI encoding."""


class EncodingId(enum.IntEnum):
    ZEROS = 0
    REPEATED_VALUE = 1
    B8D1 = 2
    B8D2 = 3
    B8D4 = 4
    B4D1 = 5
    B4D2 = 6
    B2D1 = 7
    UNCOMPRESSED = 8


# (base width, delta width) in bytes for the base+delta classes
_GEOMETRY = {
    EncodingId.B8D1: (8, 1),
    EncodingId.B8D2: (8, 2),
    EncodingId.B8D4: (8, 4),
    EncodingId.B4D1: (4, 1),
    EncodingId.B4D2: (4, 2),
    EncodingId.B2D1: (2, 1),
}

_UNPACK = {8: struct.Struct("<8Q"), 4: struct.Struct("<16I"), 2: struct.Struct("<32H")}


def geometry(encoding: EncodingId) -> tuple[int, int]:
    """Return ``(base_bytes, delta_bytes)``; RepeatedValue reports ``(8, 0)``."""
    if encoding is EncodingId.REPEATED_VALUE:
        return 8, 0
    if encoding is EncodingId.ZEROS:
        return 0, 0
    if encoding not in _GEOMETRY:
        raise ValueError(f"{encoding!r} has no geometry")
    return _GEOMETRY[encoding]


def encoding_size_bits(encoding: EncodingId) -> int:
    """Packed size of a line under ``encoding``; fixed per class."""
    if encoding is EncodingId.ZEROS:
        return TAG_BITS
    if encoding is EncodingId.REPEATED_VALUE:
        return TAG_BITS + 64
    if encoding is EncodingId.UNCOMPRESSED:
        return LINE_BITS
    base_bytes, delta_bytes = _GEOMETRY[encoding]
    count = LINE_BYTES // base_bytes
    return TAG_BITS + count + 8 * base_bytes + count * 8 * delta_bytes


# Candidate order for compress(): ascending size, ties kept in declaration order.
_BY_SIZE = sorted(
    (e for e in EncodingId if e is not EncodingId.UNCOMPRESSED),
    key=lambda e: (encoding_size_bits(e), int(e)),
)


@dataclass(frozen=True)
class CompressedLine:
    encoding: EncodingId
    base: int = 0
    deltas: tuple[int, ...] = ()
    zero_mask: tuple[bool, ...] = ()

    @property
    def size_bits(self) -> int:
        return encoding_size_bits(self.encoding)


def _fits(value: int, width_bits: int) -> bool:
    half = 1 << (width_bits - 1)
    return -half <= value < half


def _signed(value: int, width_bits: int) -> int:
    if value >> (width_bits - 1):
        return value - (1 << width_bits)
    return value


def try_encoding(line: bytes, encoding: EncodingId) -> CompressedLine | None:
    """Encode ``line`` with one specific class, or return None if it does not fit."""
    if len(line) != LINE_BYTES:
        raise ValueError(f"line must be {LINE_BYTES} bytes, got {len(line)}")
    if encoding is EncodingId.UNCOMPRESSED:
        raise ValueError("UNCOMPRESSED is not a compressed encoding")

    if encoding is EncodingId.ZEROS:
        return CompressedLine(encoding) if not any(line) else None

    if encoding is EncodingId.REPEATED_VALUE:
        words = _UNPACK[8].unpack(line)
        if words.count(words[0]) == len(words):
            return CompressedLine(encoding, base=words[0])
        return None

    base_bytes, delta_bytes = _GEOMETRY[encoding]
    wbits = 8 * base_bytes
    dbits = 8 * delta_bytes
    modulus = 1 << wbits
    half = 1 << (dbits - 1)

    base = None
    deltas = []
    mask = []
    for v in _UNPACK[base_bytes].unpack(line):
        sv = v - modulus if v >> (wbits - 1) else v
        if -half <= sv < half:
            deltas.append(sv)
            mask.append(True)
            continue
        if base is None:
            base = v
        d = (v - base) % modulus
        if d >> (wbits - 1):
            d -= modulus
        if not -half <= d < half:
            return None
        deltas.append(d)
        mask.append(False)
    return CompressedLine(encoding, base=base or 0, deltas=tuple(deltas), zero_mask=tuple(mask))


def compress(line: bytes, budget_bits: int = LINE_BITS) -> CompressedLine | None:
    """Smallest encoding of ``line`` whose size is within ``budget_bits``.

    Returns None when no class fits; the caller stores the line uncompressed.
    """
    if not 0 < budget_bits <= LINE_BITS:
        raise ValueError(f"budget_bits must be in (0, {LINE_BITS}], got {budget_bits}")
    for encoding in _BY_SIZE:
        if encoding_size_bits(encoding) > budget_bits:
            break
        c = try_encoding(line, encoding)
        if c is not None:
            return c
    return None


def compressed_size_bits(line: bytes) -> int:
    c = compress(line, LINE_BITS)
    return LINE_BITS if c is None else c.size_bits


def _check(c: CompressedLine) -> None:
    if c.encoding is EncodingId.UNCOMPRESSED:
        raise CorruptLineError("UNCOMPRESSED cannot appear in a compressed line")
    if c.encoding in (EncodingId.ZEROS, EncodingId.REPEATED_VALUE):
        if c.deltas or c.zero_mask:
            raise CorruptLineError(f"{c.encoding.name} carries no deltas")
        if c.encoding is EncodingId.ZEROS and c.base:
            raise CorruptLineError("ZEROS carries no base")
        if not 0 <= c.base < 1 << 64:
            raise CorruptLineError("base out of range")
        return
    base_bytes, delta_bytes = _GEOMETRY[c.encoding]
    count = LINE_BYTES // base_bytes
    if len(c.deltas) != count or len(c.zero_mask) != count:
        raise CorruptLineError(
            f"{c.encoding.name} needs {count} elements, got {len(c.deltas)}/{len(c.zero_mask)}"
        )
    if not 0 <= c.base < 1 << (8 * base_bytes):
        raise CorruptLineError("base out of range")
    for d in c.deltas:
        if not _fits(d, 8 * delta_bytes):
            raise CorruptLineError(f"delta {d} does not fit {8 * delta_bytes} bits")


def decompress(c: CompressedLine) -> bytes:
    _check(c)
    if c.encoding is EncodingId.ZEROS:
        return bytes(LINE_BYTES)
    if c.encoding is EncodingId.REPEATED_VALUE:
        return _UNPACK[8].pack(*([c.base] * 8))
    base_bytes, _ = _GEOMETRY[c.encoding]
    modulus = 1 << (8 * base_bytes)
    words = [((0 if z else c.base) + d) % modulus for d, z in zip(c.deltas, c.zero_mask)]
    return _UNPACK[base_bytes].pack(*words)


def pack(c: CompressedLine) -> int:
    """Serialize to an integer holding exactly ``c.size_bits`` bits, MSB first."""
    _check(c)
    acc = int(c.encoding)
    if c.encoding is EncodingId.ZEROS:
        return acc
    if c.encoding is EncodingId.REPEATED_VALUE:
        return (acc << 64) | c.base
    base_bytes, delta_bytes = _GEOMETRY[c.encoding]
    dbits = 8 * delta_bytes
    dmask = (1 << dbits) - 1
    for z in c.zero_mask:
        acc = (acc << 1) | z
    acc = (acc << (8 * base_bytes)) | c.base
    for d in c.deltas:
        acc = (acc << dbits) | (d & dmask)
    return acc


def unpack(value: int, nbits: int) -> CompressedLine:
    """Inverse of :func:`pack`; raises CorruptLineError on any inconsistency."""
    if nbits < TAG_BITS or value >> nbits:
        raise CorruptLineError(f"{nbits}-bit payload is malformed")
    tag = value >> (nbits - TAG_BITS)
    if tag >= EncodingId.UNCOMPRESSED:
        raise CorruptLineError(f"invalid encoding tag {tag}")
    encoding = EncodingId(tag)
    if encoding_size_bits(encoding) != nbits:
        raise CorruptLineError(
            f"{encoding.name} occupies {encoding_size_bits(encoding)} bits, payload has {nbits}"
        )
    if encoding is EncodingId.ZEROS:
        return CompressedLine(encoding)
    if encoding is EncodingId.REPEATED_VALUE:
        return CompressedLine(encoding, base=value & ((1 << 64) - 1))
    base_bytes, delta_bytes = _GEOMETRY[encoding]
    count = LINE_BYTES // base_bytes
    dbits = 8 * delta_bytes
    dmask = (1 << dbits) - 1
    deltas = [_signed((value >> (dbits * (count - 1 - i))) & dmask, dbits) for i in range(count)]
    rest = value >> (dbits * count)
    base = rest & ((1 << (8 * base_bytes)) - 1)
    rest >>= 8 * base_bytes
    mask = tuple(bool((rest >> (count - 1 - i)) & 1) for i in range(count))
    return CompressedLine(encoding, base=base, deltas=tuple(deltas), zero_mask=mask)
