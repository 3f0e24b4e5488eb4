"""(523, 512) extended Hamming code.

Data bit ``i`` gets the Hamming column equal to the ``i``-th integer in
1..522 that is not a power of two; Hamming check bit ``j`` gets column
``2**j``. Codeword layout: 512 data bits, 10 Hamming check bits (``j``
ascending), then one overall parity bit over everything before it.
"""

from __future__ import annotations

import numpy as np

from .outcome import CodeSpec, Codeword, DecodeOutcome, DecodeStatus, Scheme

K = 512
HAMMING_BITS = 10
R = HAMMING_BITS + 1
N = K + R
CODE_SPEC = CodeSpec(Scheme.SEC_DED, K, R)

DATA_COLUMNS: tuple[int, ...] = tuple(v for v in range(1, N) if v & (v - 1))
assert len(DATA_COLUMNS) == K

# syndrome value -> codeword sequence position
_POSITION_OF = {c: i for i, c in enumerate(DATA_COLUMNS)}
_POSITION_OF.update({1 << j: K + j for j in range(HAMMING_BITS)})

_NBYTES = K // 8
# _ENC[b][v]: Hamming syndrome contribution of data byte b holding value v
_ENC: list[list[int]] = []
for _b in range(_NBYTES):
    _row = [0] * 256
    for _v in range(1, 256):
        _low = _v & -_v
        _bitpos = 7 - (_low.bit_length() - 1)
        _row[_v] = _row[_v ^ _low] ^ DATA_COLUMNS[8 * _b + _bitpos]
    _ENC.append(_row)
del _b, _row, _v, _low, _bitpos

# reverse of a 10-bit field so check bit j sits at sequence position K + j
_REV10 = [int(format(v, "010b")[::-1], 2) for v in range(1 << HAMMING_BITS)]


def parity_check_matrix() -> np.ndarray:
    """Full 11 x 523 parity-check matrix (last row is the all-ones parity row)."""
    h = np.zeros((R, N), dtype=np.uint8)
    for pos in range(N - 1):
        col = DATA_COLUMNS[pos] if pos < K else 1 << (pos - K)
        for j in range(HAMMING_BITS):
            h[j, pos] = (col >> j) & 1
    h[HAMMING_BITS, :] = 1
    return h


def _as_int(data: bytes | int) -> int:
    if isinstance(data, (bytes, bytearray)):
        if len(data) != K // 8:
            raise ValueError(f"SEC-DED data must be {K // 8} bytes, got {len(data)}")
        return int.from_bytes(data, "big")
    if data < 0 or data >> K:
        raise ValueError(f"SEC-DED data must fit in {K} bits")
    return data


def _syndrome(data: int) -> int:
    s = 0
    for b, v in enumerate(data.to_bytes(_NBYTES, "big")):
        s ^= _ENC[b][v]
    return s


def encode(data: bytes | int) -> Codeword:
    d = _as_int(data)
    s = _syndrome(d)
    body = (d << HAMMING_BITS) | _REV10[s]
    return Codeword((body << 1) | (body.bit_count() & 1), N)


def decode(cw: Codeword) -> DecodeOutcome:
    if cw.n != N:
        raise ValueError(f"SEC-DED codeword must have {N} bits, got {cw.n}")
    bits = cw.bits
    data = bits >> R
    received = _REV10[(bits >> 1) & ((1 << HAMMING_BITS) - 1)]
    s = _syndrome(data) ^ received
    odd = bits.bit_count() & 1
    if s == 0:
        if not odd:
            return DecodeOutcome(DecodeStatus.NO_ERROR, (), data)
        return DecodeOutcome(DecodeStatus.CORRECTED, (N - 1,), data)
    if not odd:
        return DecodeOutcome(DecodeStatus.DETECTED_UNCORRECTABLE)
    pos = _POSITION_OF.get(s)
    if pos is None:
        return DecodeOutcome(DecodeStatus.DETECTED_UNCORRECTABLE)
    if pos < K:
        data ^= 1 << (K - 1 - pos)
    return DecodeOutcome(DecodeStatus.CORRECTED, (pos,), data)
