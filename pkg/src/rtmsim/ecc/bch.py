"""TEC-QED: shortened binary BCH(1023, 993), t=3, extended by an overall parity bit.

For a ``k``-bit message the codeword is ``k + 31`` bits:

* positions ``0..k-1``: the message, first bit = highest-degree coefficient
  (degree ``k + 29``);
* positions ``k..k+29``: BCH parity, low degree first (position ``k + j``
  holds the coefficient of ``x**j``);
* position ``k + 30``: even parity over all preceding bits.

The generator is lcm of the minimal polynomials of alpha, alpha^3, alpha^5 in
GF(2^10) built from x^10 + x^3 + 1. The error locator is solved in closed
form (Peterson) and its roots are searched only over degrees that exist in
the shortened code.
"""

from __future__ import annotations

import numpy as np

from . import gf
from .outcome import CodeSpec, Codeword, DecodeOutcome, DecodeStatus, Scheme

T = 3
MAX_K = 512
PARITY_BITS = 30
R = PARITY_BITS + 1
_MASK = (1 << PARITY_BITS) - 1

GENERATOR = gf.gf2_poly_mul(
    gf.gf2_poly_mul(gf.minimal_polynomial(1), gf.minimal_polynomial(3)),
    gf.minimal_polynomial(5),
)
assert GENERATOR.bit_length() - 1 == PARITY_BITS

# byte-at-a-time remainder table: _REM[i] = (i(x) * x^30) mod g(x)
_REM = [gf.gf2_poly_mod(i << PARITY_BITS, GENERATOR) for i in range(256)]

# syndrome tables over the 30-bit remainder, 8 coefficient degrees per chunk;
# each entry packs S1 | S3 << 10 | S5 << 20
_SYN: list[list[int]] = []
for _chunk in range(4):
    _row = [0] * 256
    for _v in range(1, 256):
        _low = _v & -_v
        _d = 8 * _chunk + _low.bit_length() - 1
        _row[_v] = _row[_v ^ _low] ^ (
            gf.alpha_pow(_d) | gf.alpha_pow(3 * _d) << 10 | gf.alpha_pow(5 * _d) << 20
        )
    _SYN.append(_row)
del _chunk, _row, _v, _low, _d


def _rev30(v: int) -> int:
    return int(format(v, "030b")[::-1], 2)


def code_spec(k: int) -> CodeSpec:
    _check_k(k)
    return CodeSpec(Scheme.TEC_QED, k, R)


def _check_k(k: int) -> None:
    if not 1 <= k <= MAX_K:
        raise ValueError(f"TEC-QED message length must be in [1, {MAX_K}], got {k}")


def parity_poly(data: int, k: int) -> int:
    """(data(x) * x^30) mod g(x), bit j = coefficient of x^j."""
    r = 0
    for b in data.to_bytes((k + 7) // 8, "big"):
        r = ((r << 8) & _MASK) ^ _REM[(r >> 22) ^ b]
    return r


def encode(data: int, k: int) -> Codeword:
    _check_k(k)
    if data < 0 or data >> k:
        raise ValueError(f"data does not fit in {k} bits")
    body = (data << PARITY_BITS) | _rev30(parity_poly(data, k))
    return Codeword((body << 1) | (body.bit_count() & 1), k + R)


def syndromes(remainder: int) -> tuple[int, int, int]:
    s = (
        _SYN[0][remainder & 0xFF]
        ^ _SYN[1][(remainder >> 8) & 0xFF]
        ^ _SYN[2][(remainder >> 16) & 0xFF]
        ^ _SYN[3][remainder >> 24]
    )
    return s & 0x3FF, (s >> 10) & 0x3FF, s >> 20


def error_locator(s1: int, s3: int, s5: int) -> list[int] | None:
    """Locator coefficients [1, l1, l2, l3] trimmed to its degree; None if inconsistent."""
    s1_3 = gf.power(s1, 3)
    det = s1_3 ^ s3
    if det == 0:
        if s1 != 0 and s5 == gf.power(s1, 5):
            return [1, s1]
        return None
    l2 = gf.div(gf.mul(gf.mul(s1, s1), s3) ^ s5, det)
    l3 = det ^ gf.mul(s1, l2)
    loc = [1, s1, l2, l3]
    while loc[-1] == 0:
        loc.pop()
    return loc


def _roots(loc: list[int], nbch: int) -> list[int] | None:
    """Degrees d in [0, nbch) with loc(alpha^-d) == 0; None unless exactly deg(loc) of them."""
    deg = np.arange(nbch, dtype=np.int64)
    acc = np.ones(nbch, dtype=np.int64)
    for i, c in enumerate(loc[1:], start=1):
        if c:
            acc ^= gf.EXP_NP[(gf.LOG[c] - i * deg) % gf.ORDER]
    found = np.flatnonzero(acc == 0)
    if len(found) != len(loc) - 1:
        return None
    return found.tolist()


def decode(cw: Codeword, k: int | None = None) -> DecodeOutcome:
    if k is None:
        k = cw.n - R
    _check_k(k)
    if cw.n != k + R:
        raise ValueError(f"TEC-QED codeword for k={k} must have {k + R} bits, got {cw.n}")
    bits = cw.bits
    n = cw.n
    data = bits >> R
    received = _rev30((bits >> 1) & _MASK)
    rem = parity_poly(data, k) ^ received
    odd = bits.bit_count() & 1
    if rem == 0:
        if not odd:
            return DecodeOutcome(DecodeStatus.NO_ERROR, (), data)
        return DecodeOutcome(DecodeStatus.CORRECTED, (n - 1,), data)

    loc = error_locator(*syndromes(rem))
    if loc is None:
        return DecodeOutcome(DecodeStatus.DETECTED_UNCORRECTABLE)
    degrees = _roots(loc, k + PARITY_BITS)
    if degrees is None:
        return DecodeOutcome(DecodeStatus.DETECTED_UNCORRECTABLE)
    positions = [k + d if d < PARITY_BITS else k - 1 - (d - PARITY_BITS) for d in degrees]
    # overall parity still odd after fixing the located bits => parity bit flipped too
    if odd != (len(positions) & 1):
        positions.append(n - 1)
    if len(positions) > T:
        return DecodeOutcome(DecodeStatus.DETECTED_UNCORRECTABLE)
    for p in positions:
        if p < k:
            data ^= 1 << (k - 1 - p)
    return DecodeOutcome(DecodeStatus.CORRECTED, tuple(sorted(positions)), data)
