"""Stochastic RTM error channels applied to stored cell vectors.

A stored line is an int of ``nbits`` cells, cell 0 in the most significant
bit. Every function returns the corrupted cells together with the exact flip
mask (``old ^ new``) so an oracle can classify what the decoder did.

Per-bit channels (write failure, read disturbance, retention) flip each cell
independently. Position errors hit one track: bit ``i`` of the 512-cell line
lives on track ``i % tracks``, so a single bad shift corrupts up to
``512 / tracks`` cells of the same line at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields

import numpy as np

from .rng import Channel, event_stream

LINE_CELLS = 512


@dataclass(frozen=True)
class ErrorRates:
    write_failure: float = 1e-5
    read_disturb: float = 1e-6
    retention: float = 1e-12
    shift: float = 1e-6
    oos_weight: float = 1.0
    sim_weight: float = 1.0

    def __post_init__(self):
        for name in ("write_failure", "read_disturb", "retention", "shift"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability in [0, 1], got {p}")
        if self.oos_weight < 0 or self.sim_weight < 0:
            raise ValueError("shift-kind weights must be nonnegative")
        if self.shift > 0 and self.oos_weight + self.sim_weight == 0:
            raise ValueError("shift weights cannot both be zero when shift errors are enabled")

    @classmethod
    def zero(cls) -> ErrorRates:
        return cls(0.0, 0.0, 0.0, 0.0)

    @property
    def all_zero(self) -> bool:
        return not (self.write_failure or self.read_disturb or self.retention or self.shift)

    def scaled(self, factor: float) -> ErrorRates:
        """Multiply every per-bit probability (not the shift channel) by ``factor``."""
        return ErrorRates(
            min(1.0, self.write_failure * factor),
            min(1.0, self.read_disturb * factor),
            min(1.0, self.retention * factor),
            self.shift,
            self.oos_weight,
            self.sim_weight,
        )

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class RtmLayout:
    tracks_per_line: int = 8
    vacancy: int = 0

    def __post_init__(self):
        if self.tracks_per_line <= 0 or LINE_CELLS % self.tracks_per_line:
            raise ValueError(f"tracks_per_line must divide {LINE_CELLS}")
        if self.vacancy not in (0, 1):
            raise ValueError("vacancy must be 0 or 1")

    def track_of(self, cell: int) -> int:
        return cell % self.tracks_per_line

    def track_cells(self, track: int) -> range:
        return range(track, LINE_CELLS, self.tracks_per_line)


class ShiftKind(enum.Enum):
    OUT_OF_STEP = "out-of-step"
    STOP_IN_MIDDLE = "stop-in-middle"


class FailureKind(enum.Enum):
    DETECTED_UNCORRECTABLE = "detected-uncorrectable"
    SILENT_DATA_CORRUPTION = "silent-data-corruption"


@dataclass(frozen=True)
class FailureRecord:
    cycle: int
    address: int
    kind: FailureKind
    injected_weight: int


def positions_mask(positions, nbits: int) -> int:
    mask = 0
    for p in positions:
        mask |= 1 << (nbits - 1 - int(p))
    return mask


def mask_positions(mask: int, nbits: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(nbits - low.bit_length())
        mask ^= low
    return sorted(out)


def retention_probability(p_retention: float, idle_cycles: int) -> float:
    """1 - (1 - p)^idle, without cancellation for tiny p."""
    if idle_cycles <= 0 or p_retention <= 0.0:
        return 0.0
    if p_retention >= 1.0:
        return 1.0
    return -math.expm1(idle_cycles * math.log1p(-p_retention))


def _bernoulli(bits: int, nbits: int, p: float, rng: np.random.Generator) -> tuple[int, int]:
    if p <= 0.0:
        return bits, 0
    k = int(rng.binomial(nbits, p))
    if k == 0:
        return bits, 0
    flips = positions_mask(rng.choice(nbits, size=k, replace=False), nbits)
    return bits ^ flips, flips


def inject_write(bits: int, nbits: int, rates: ErrorRates, rng: np.random.Generator) -> tuple[int, int]:
    return _bernoulli(bits, nbits, rates.write_failure, rng)


def inject_read(bits: int, nbits: int, rates: ErrorRates, rng: np.random.Generator) -> tuple[int, int]:
    return _bernoulli(bits, nbits, rates.read_disturb, rng)


def inject_retention(
    bits: int, nbits: int, idle_cycles: int, rates: ErrorRates, rng: np.random.Generator
) -> tuple[int, int]:
    if idle_cycles < 0:
        raise ValueError("idle_cycles must be nonnegative")
    return _bernoulli(bits, nbits, retention_probability(rates.retention, idle_cycles), rng)


def inject_shift(
    bits: int, nbits: int, layout: RtmLayout, rates: ErrorRates, rng: np.random.Generator
) -> tuple[int, int, ShiftKind | None]:
    """Apply at most one position error to the first 512 cells of ``bits``."""
    if nbits < LINE_CELLS:
        raise ValueError(f"cell vector must hold at least {LINE_CELLS} line cells")
    if rates.shift <= 0.0 or rng.random() >= rates.shift:
        return bits, 0, None
    total = rates.oos_weight + rates.sim_weight
    kind = ShiftKind.OUT_OF_STEP if rng.random() * total < rates.oos_weight else ShiftKind.STOP_IN_MIDDLE
    track = int(rng.integers(layout.tracks_per_line))
    cells = list(layout.track_cells(track))
    old = [(bits >> (nbits - 1 - c)) & 1 for c in cells]
    if kind is ShiftKind.OUT_OF_STEP:
        step = 1 if rng.random() < 0.5 else -1
        new = [old[j + step] if 0 <= j + step < len(old) else layout.vacancy for j in range(len(old))]
    else:
        coin = rng.integers(0, 2, size=len(old))
        new = [int(b) for b in coin]
    flips = 0
    for c, a, b in zip(cells, old, new):
        if a != b:
            flips |= 1 << (nbits - 1 - c)
    return bits ^ flips, flips, kind


class Injector:
    """Per-cache injection state: rates, layout and per-address event counters."""

    def __init__(self, rates: ErrorRates, seed: int, trial: int = 0, layout: RtmLayout | None = None):
        self.rates = rates
        self.seed = seed
        self.trial = trial
        self.layout = layout or RtmLayout()
        self._events: dict[int, int] = {}

    def _stream(self, address: int, event: int, channel: Channel) -> np.random.Generator:
        return event_stream(self.seed, self.trial, address, event, channel)

    def next_event(self, address: int) -> int:
        e = self._events.get(address, 0)
        self._events[address] = e + 1
        return e

    def on_write(self, address: int, event: int, cells: int, ncells: int) -> tuple[int, int]:
        """Write failure plus a position error on the writing access."""
        flips = 0
        if self.rates.write_failure:
            cells, f = inject_write(cells, ncells, self.rates, self._stream(address, event, Channel.WRITE))
            flips ^= f
        if self.rates.shift:
            cells, f, _ = inject_shift(cells, ncells, self.layout, self.rates, self._stream(address, event, Channel.SHIFT))
            flips ^= f
        return cells, flips

    def before_read(self, address: int, event: int, cells: int, ncells: int, idle_cycles: int) -> tuple[int, int]:
        """Retention over the idle interval, then the aligning shift."""
        flips = 0
        if self.rates.retention and idle_cycles > 0:
            cells, f = inject_retention(
                cells, ncells, idle_cycles, self.rates, self._stream(address, event, Channel.RETENTION)
            )
            flips ^= f
        if self.rates.shift:
            cells, f, _ = inject_shift(cells, ncells, self.layout, self.rates, self._stream(address, event, Channel.SHIFT))
            flips ^= f
        return cells, flips

    def after_read(self, address: int, event: int, cells: int, ncells: int) -> tuple[int, int]:
        """Read disturbance persists in the stored state."""
        if not self.rates.read_disturb:
            return cells, 0
        return inject_read(cells, ncells, self.rates, self._stream(address, event, Channel.READ_DISTURB))
