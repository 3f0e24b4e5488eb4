"""Capability suites for both codes, shared by the CLI self-test."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from importlib import resources

from . import bch, secded
from .outcome import Codeword, DecodeStatus


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int
    verb: str

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} {self.verb}"


def _expect_corrected(decode, cw: Codeword, positions, data: int) -> bool:
    try:
        out = decode(cw.flip(*positions))
    except Exception:
        return False
    if not positions:
        return out.status is DecodeStatus.NO_ERROR and out.data == data
    return out.status is DecodeStatus.CORRECTED and out.data == data and out.positions == tuple(sorted(positions))


def _expect_detected(decode, cw: Codeword, positions) -> bool:
    try:
        return decode(cw.flip(*positions)).status is DecodeStatus.DETECTED_UNCORRECTABLE
    except Exception:
        return False


def _patterns(n: int, weight: int, exhaustive: bool, samples: int, rng: random.Random):
    if exhaustive:
        yield from itertools.combinations(range(n), weight)
    else:
        for _ in range(samples):
            yield tuple(rng.sample(range(n), weight))


def secded_suite(max_exhaustive_weight: int = 2, samples: int = 10000, seed: int = 1) -> list[SuiteResult]:
    rng = random.Random(seed)
    data = rng.getrandbits(secded.K)
    cw = secded.encode(data)
    out = []
    for weight, name in ((1, "single-bit"), (2, "double-bit")):
        exhaustive = weight <= max_exhaustive_weight
        passed = total = 0
        for pos in _patterns(secded.N, weight, exhaustive, samples, rng):
            total += 1
            if weight == 1:
                passed += _expect_corrected(secded.decode, cw, pos, data)
            else:
                passed += _expect_detected(secded.decode, cw, pos)
        out.append(SuiteResult(f"secded {name}", passed, total, "corrected" if weight == 1 else "detected"))
    return out


def tecqed_suite(
    k: int = 481, max_exhaustive_weight: int = 2, samples: int = 10000, seed: int = 2
) -> list[SuiteResult]:
    rng = random.Random(seed)
    data = rng.getrandbits(k)
    cw = bch.encode(data, k)
    out = []
    for weight in (1, 2, 3, 4):
        exhaustive = weight <= max_exhaustive_weight
        passed = total = 0
        for pos in _patterns(cw.n, weight, exhaustive, samples, rng):
            total += 1
            if weight <= bch.T:
                passed += _expect_corrected(bch.decode, cw, pos, data)
            else:
                passed += _expect_detected(bch.decode, cw, pos)
        verb = "corrected" if weight <= bch.T else "detected"
        out.append(SuiteResult(f"tecqed weight-{weight}", passed, total, verb))
    return out


def golden_vectors():
    """Yield ``(scheme, k, data, codeword_bits)`` from the frozen reference file."""
    text = resources.files("rtmsim").joinpath("data/golden_vectors.txt").read_text(encoding="ascii")
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "secded":
            yield "secded", secded.K, int(parts[1], 16), int(parts[2], 16)
        else:
            yield "tecqed", int(parts[1]), int(parts[2], 16), int(parts[3], 16)


def golden_suite() -> SuiteResult:
    passed = total = 0
    for scheme, k, data, bits in golden_vectors():
        total += 1
        cw = secded.encode(data) if scheme == "secded" else bch.encode(data, k)
        passed += cw.bits == bits
    return SuiteResult("golden vectors", passed, total, "matched")
