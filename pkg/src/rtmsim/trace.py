"""Plain-text memory traces and a synthetic generator with tunable value locality.

One record per line::

    W 0x1000 <128 hex chars>     write-back of a 64-byte line from the upper level
    R 0x1040                     read request from the upper level

Blank lines and ``#`` comments are skipped. Addresses are aligned down to
the line internally.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

LINE_BYTES = 64
_LINE_MASK = ~(LINE_BYTES - 1)


class TraceError(ValueError):
    def __init__(self, path, lineno: int, field: str, message: str):
        super().__init__(f"{path}:{lineno}: bad {field}: {message}")
        self.lineno = lineno
        self.field = field


@dataclass(frozen=True)
class TraceRecord:
    op: str
    address: int
    payload: bytes | None = None
    lineno: int = 0

    @property
    def line_address(self) -> int:
        return self.address & _LINE_MASK & ((1 << 64) - 1)

    def format(self) -> str:
        if self.op == "W":
            return f"W {self.address:#x} {self.payload.hex()}"
        return f"R {self.address:#x}"

    def same_access(self, other: TraceRecord) -> bool:
        return (self.op, self.address, self.payload) == (other.op, other.address, other.payload)


def parse_line(text: str, lineno: int = 0, path="<trace>") -> TraceRecord | None:
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    parts = body.split()
    op = parts[0].upper()
    if op not in ("R", "W"):
        raise TraceError(path, lineno, "op", f"expected R or W, got {parts[0]!r}")
    if len(parts) < 2:
        raise TraceError(path, lineno, "address", "missing")
    try:
        address = int(parts[1], 16)
    except ValueError:
        raise TraceError(path, lineno, "address", f"not hexadecimal: {parts[1]!r}") from None
    if not 0 <= address < 1 << 64:
        raise TraceError(path, lineno, "address", "outside the 64-bit range")
    if op == "R":
        if len(parts) != 2:
            raise TraceError(path, lineno, "payload", "reads carry no payload")
        return TraceRecord("R", address, None, lineno)
    if len(parts) != 3:
        raise TraceError(path, lineno, "payload", "writes need exactly one payload field")
    hexpay = parts[2]
    if len(hexpay) != 2 * LINE_BYTES:
        raise TraceError(path, lineno, "payload", f"expected {2 * LINE_BYTES} hex chars, got {len(hexpay)}")
    try:
        payload = bytes.fromhex(hexpay)
    except ValueError:
        raise TraceError(path, lineno, "payload", "not hexadecimal") from None
    return TraceRecord("W", address, payload, lineno)


def parse_trace(path) -> Iterator[TraceRecord]:
    """Stream records from a trace file, one line at a time."""
    with open(path, "r", encoding="ascii") as fh:
        for lineno, text in enumerate(fh, start=1):
            rec = parse_line(text, lineno, path)
            if rec is not None:
                yield rec


def write_trace(records: Iterable[TraceRecord], path) -> int:
    n = 0
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for rec in records:
            fh.write(rec.format())
            fh.write("\n")
            n += 1
    return n


# -- synthetic workloads ----------------------------------------------------

VALUE_CLASSES = ("zero", "repeated", "narrow", "random")


@dataclass(frozen=True)
class SyntheticProfile:
    working_set_lines: int = 131072
    write_fraction: float = 0.2
    zero_lines: float = 0.3
    repeated_lines: float = 0.15
    narrow_delta_lines: float = 0.45
    random_lines: float = 0.1
    delta_width: int = 1
    address_dist: str = "uniform"
    zipf_s: float = 1.0
    length: int = 100000
    seed: int = 1
    base_address: int = 0x10000000

    def __post_init__(self):
        if self.working_set_lines <= 0:
            raise ValueError("working_set_lines must be positive")
        if not 0.0 <= self.write_fraction <= 1.0:
            raise ValueError("write_fraction must be in [0, 1]")
        mix = self.mix
        if any(v < 0 for v in mix):
            raise ValueError("value-mix fractions must be nonnegative")
        if abs(sum(mix) - 1.0) > 1e-9:
            raise ValueError(f"value-mix fractions sum to {sum(mix)!r}, not 1")
        if self.delta_width not in (1, 2, 4):
            raise ValueError("delta_width must be 1, 2 or 4")
        if self.address_dist not in ("uniform", "zipf"):
            raise ValueError("address_dist must be 'uniform' or 'zipf'")
        if self.address_dist == "zipf" and self.zipf_s <= 0:
            raise ValueError("zipf_s must be positive")
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.base_address % LINE_BYTES:
            raise ValueError("base_address must be line-aligned")

    @property
    def mix(self) -> tuple[float, float, float, float]:
        return (self.zero_lines, self.repeated_lines, self.narrow_delta_lines, self.random_lines)

    def with_(self, **changes) -> SyntheticProfile:
        d = asdict(self)
        d.update(changes)
        return SyntheticProfile(**d)


# Stand-in workload mixes; no equivalence to any particular benchmark is implied.
BUILTIN_PROFILES = {
    "mixA": SyntheticProfile(
        working_set_lines=131072, write_fraction=0.16, zero_lines=0.35, repeated_lines=0.15,
        narrow_delta_lines=0.40, random_lines=0.10, seed=11,
    ),
    "mixB": SyntheticProfile(
        working_set_lines=65536, write_fraction=0.3, zero_lines=0.2, repeated_lines=0.1,
        narrow_delta_lines=0.4, random_lines=0.3, delta_width=2, address_dist="zipf", zipf_s=0.9, seed=12,
    ),
    "mixC": SyntheticProfile(
        working_set_lines=262144, write_fraction=0.1, zero_lines=0.55, repeated_lines=0.2,
        narrow_delta_lines=0.23, random_lines=0.02, seed=13,
    ),
    "mixD": SyntheticProfile(
        working_set_lines=32768, write_fraction=0.4, zero_lines=0.1, repeated_lines=0.05,
        narrow_delta_lines=0.35, random_lines=0.5, delta_width=4, address_dist="zipf", zipf_s=1.1, seed=14,
    ),
}

_PROFILE_KEYS = {f.name: f.type for f in fields(SyntheticProfile)}


def load_profile(source: str) -> SyntheticProfile:
    """A builtin profile name, or a ``key = value`` file of SyntheticProfile fields."""
    if source in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[source]
    from .config import ConfigError, parse_int, read_keyvalues

    values = {}
    for key, (value, lineno) in read_keyvalues(source).items():
        name = key.removeprefix("profile.")
        if name not in _PROFILE_KEYS:
            raise ConfigError(
                f"{source}:{lineno}: unknown profile key {key!r}; valid keys: {', '.join(sorted(_PROFILE_KEYS))}"
            )
        parse = {"int": parse_int, "float": float}.get(_PROFILE_KEYS[name], str)
        try:
            values[name] = parse(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {value!r}") from None
    try:
        return SyntheticProfile(**values)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _random_payload(seed: int, index: int) -> bytes:
    return hashlib.blake2b(
        struct.pack("<QQ", seed & ((1 << 64) - 1), index), digest_size=64, person=b"rtmsim-rand"
    ).digest()


def make_payload(kind: str, rng: np.random.Generator, profile: SyntheticProfile, index: int) -> bytes:
    if kind == "zero":
        return bytes(LINE_BYTES)
    if kind == "repeated":
        v = int(rng.integers(1, 1 << 63)) | (1 << 63)
        return struct.pack("<Q", v) * 8
    if kind == "narrow":
        dbits = 8 * profile.delta_width
        # element 0 is the base; its top byte is nonzero so it never fits a zero-based delta
        base = int(rng.integers(1 << 56, 1 << 63)) | (1 << 63)
        deltas = rng.integers(-(1 << (dbits - 1)), 1 << (dbits - 1), size=7)
        words = [base] + [(base + int(d)) % (1 << 64) for d in deltas]
        return struct.pack("<8Q", *words)
    if kind == "random":
        return _random_payload(profile.seed, index)
    raise ValueError(f"unknown value class {kind!r}")


def _zipf_cdf(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.power(np.arange(1, n + 1, dtype=np.float64), s)
    cdf = np.cumsum(w)
    return cdf / cdf[-1]


def generate_records(profile: SyntheticProfile, with_kinds: bool = False) -> Iterator:
    """Yield TraceRecords (or ``(record, value_class)`` pairs) deterministically from the seed."""
    rng = np.random.Generator(np.random.PCG64(profile.seed))
    n = profile.working_set_lines
    cdf = _zipf_cdf(n, profile.zipf_s) if profile.address_dist == "zipf" else None
    # odd multiplier scatters popular ranks across sets
    stride = 2654435761 % n if n > 1 else 0
    if n > 1 and math.gcd(stride, n) != 1:
        stride = 1
    mix_cdf = np.cumsum(profile.mix)
    chunk = 4096
    produced = 0
    while produced < profile.length:
        m = min(chunk, profile.length - produced)
        if cdf is None:
            ranks = rng.integers(0, n, size=m)
        else:
            ranks = np.minimum(np.searchsorted(cdf, rng.random(m), side="right"), n - 1)
        is_write = rng.random(m) < profile.write_fraction
        kinds_u = rng.random(m)
        for j in range(m):
            line = (int(ranks[j]) * stride) % n if n > 1 else 0
            address = profile.base_address + line * LINE_BYTES
            index = produced + j
            if is_write[j]:
                kind = VALUE_CLASSES[min(int(np.searchsorted(mix_cdf, kinds_u[j], side="right")), 3)]
                rec = TraceRecord("W", address, make_payload(kind, rng, profile, index))
            else:
                kind = None
                rec = TraceRecord("R", address)
            yield (rec, kind) if with_kinds else rec
        produced += m


def generate_trace(profile: SyntheticProfile, path) -> int:
    return write_trace(generate_records(profile), Path(path))
