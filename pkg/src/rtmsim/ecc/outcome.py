from __future__ import annotations

import enum
from dataclasses import dataclass


class DecodeStatus(enum.Enum):
    NO_ERROR = "no-error"
    CORRECTED = "corrected"
    DETECTED_UNCORRECTABLE = "detected-uncorrectable"


class Scheme(enum.Enum):
    SEC_DED = "secded"
    TEC_QED = "tecqed"


@dataclass(frozen=True)
class CodeSpec:
    scheme: Scheme
    k: int
    r: int

    @property
    def n(self) -> int:
        return self.k + self.r


@dataclass(frozen=True)
class Codeword:
    """``n`` code bits held in an int; sequence position 0 is the most significant bit.

    Data bits come first, check bits after them.
    """

    bits: int
    n: int

    def bit(self, pos: int) -> int:
        return (self.bits >> (self.n - 1 - pos)) & 1

    def flip(self, *positions: int) -> Codeword:
        bits = self.bits
        for p in positions:
            if not 0 <= p < self.n:
                raise IndexError(f"position {p} outside codeword of length {self.n}")
            bits ^= 1 << (self.n - 1 - p)
        return Codeword(bits, self.n)

    def to_bitstring(self) -> str:
        return format(self.bits, f"0{self.n}b")

    @classmethod
    def from_bitstring(cls, s: str) -> Codeword:
        return cls(int(s, 2), len(s))


@dataclass(frozen=True)
class DecodeOutcome:
    status: DecodeStatus
    positions: tuple[int, ...] = ()
    data: int | None = None

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def ok(self) -> bool:
        return self.status is not DecodeStatus.DETECTED_UNCORRECTABLE
