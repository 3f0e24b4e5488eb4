"""Arithmetic in GF(2^10) via log/antilog tables."""

from __future__ import annotations

import numpy as np

M = 10
ORDER = (1 << M) - 1  # 1023
# x^10 + x^3 + 1
PRIMITIVE_POLY = (1 << 10) | (1 << 3) | 1


def _build_tables() -> tuple[list[int], list[int]]:
    exp = [0] * (2 * ORDER)
    log = [0] * (1 << M)
    x = 1
    for i in range(ORDER):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x >> M:
            x ^= PRIMITIVE_POLY
    if x != 1:
        raise AssertionError("polynomial is not primitive")
    for i in range(ORDER, 2 * ORDER):
        exp[i] = exp[i - ORDER]
    return exp, log


EXP, LOG = _build_tables()
EXP_NP = np.array(EXP[:ORDER], dtype=np.int64)


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(2^10)")
    if a == 0:
        return 0
    return EXP[(LOG[a] - LOG[b]) % ORDER]


def power(a: int, e: int) -> int:
    if a == 0:
        return 0 if e else 1
    return EXP[(LOG[a] * e) % ORDER]


def alpha_pow(e: int) -> int:
    return EXP[e % ORDER]


def poly_eval(coeffs: list[int], x: int) -> int:
    """Evaluate a polynomial with field coefficients, lowest degree first."""
    acc = 0
    for c in reversed(coeffs):
        acc = mul(acc, x) ^ c
    return acc


def minimal_polynomial(i: int) -> int:
    """Minimal polynomial of alpha^i over GF(2), as a bitmask (bit d = coeff of x^d)."""
    coset = []
    e = i % ORDER
    while e not in coset:
        coset.append(e)
        e = (2 * e) % ORDER
    poly = [1]  # field coefficients, lowest first
    for e in coset:
        root = EXP[e]
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c
            nxt[d] ^= mul(c, root)
        poly = nxt
    out = 0
    for d, c in enumerate(poly):
        if c not in (0, 1):
            raise AssertionError("minimal polynomial has non-binary coefficient")
        out |= c << d
    return out


def gf2_poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf2_poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a
