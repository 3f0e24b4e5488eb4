"""Slow, deliberately naive reference implementations used only by tests."""

from __future__ import annotations

import itertools
import math

import numpy as np

POLY = 0b10000001001  # x^10 + x^3 + 1


def gf_mul_slow(a: int, b: int) -> int:
    out = 0
    for _ in range(10):
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x400:
            a ^= POLY
    return out


def gf_pow_slow(a: int, e: int) -> int:
    out = 1
    for _ in range(e):
        out = gf_mul_slow(out, a)
    return out


ALPHA = 2


def eval_gf2_poly(coeff_bits: dict[int, int], x: int) -> int:
    """Evaluate sum(c_d * x^d) for binary coefficients given as {degree: bit}."""
    acc = 0
    xp = {}
    for d, c in coeff_bits.items():
        if c:
            if d not in xp:
                xp[d] = gf_pow_slow(x, d)
            acc ^= xp[d]
    return acc


def eval_mask_poly(mask: int, x: int) -> int:
    return eval_gf2_poly({d: (mask >> d) & 1 for d in range(mask.bit_length())}, x)


def bch_codeword_poly(bits: str, k: int) -> dict[int, int]:
    """Map a TEC-QED codeword bitstring (without its overall parity) to {degree: bit}."""
    poly = {}
    for p in range(k):
        poly[k + 29 - p] = int(bits[p])
    for j in range(30):
        poly[j] = int(bits[k + j])
    return poly


def secded_encode_matrix(data_bits: list[int]) -> list[int]:
    """Encode by solving H c = 0 using the column definition directly."""
    cols = [v for v in range(1, 523) if v & (v - 1)]
    syn = 0
    for bit, col in zip(data_bits, cols):
        if bit:
            syn ^= col
    checks = [(syn >> j) & 1 for j in range(10)]
    body = list(data_bits) + checks
    return body + [sum(body) & 1]


def syndrome_matrix(h: np.ndarray, bits: list[int]) -> np.ndarray:
    return (h.astype(np.int64) @ np.array(bits, dtype=np.int64)) % 2


def p_unc_enumerate(n: int, p: float, t: int) -> float:
    """Probability of more than t flips among n bits, by summing every pattern."""
    total = 0.0
    terms = []
    for pattern in itertools.product((0, 1), repeat=n):
        w = sum(pattern)
        if w > t:
            terms.append(p**w * (1 - p) ** (n - w))
    total = math.fsum(terms)
    return total


def minimal_poly_slow(i: int) -> int:
    conj = []
    e = i % 1023
    while e not in conj:
        conj.append(e)
        e = 2 * e % 1023
    poly = [1]
    for e in conj:
        root = gf_pow_slow(ALPHA, e)
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c
            nxt[d] ^= gf_mul_slow(c, root)
        poly = nxt
    assert all(c in (0, 1) for c in poly)
    return sum(c << d for d, c in enumerate(poly))


def clmul(a: int, b: int) -> int:
    out = 0
    for d in range(b.bit_length()):
        if (b >> d) & 1:
            out ^= a << d
    return out


def generator_slow() -> int:
    return clmul(clmul(minimal_poly_slow(1), minimal_poly_slow(3)), minimal_poly_slow(5))


def tecqed_encode_slow(data_bits: str, g: int) -> str:
    """Systematic encoding by bitwise long division; returns the full codeword bitstring."""
    k = len(data_bits)
    rem = [int(b) for b in data_bits] + [0] * 30  # highest degree first
    gbits = [int(b) for b in format(g, "031b")]
    for i in range(k):
        if rem[i]:
            for j in range(31):
                rem[i + j] ^= gbits[j]
    parity_high_first = rem[k:]
    parity_low_first = "".join(str(b) for b in reversed(parity_high_first))
    body = data_bits + parity_low_first
    return body + str(body.count("1") & 1)
