"""Set-associative write-back RTM last-level cache with dual ECC placement.

Datapaths:

* fills from memory are stored uncompressed and clean, under SEC-DED (or no
  code at all when the cache has no SEC-DED storage);
* write-backs from the upper level are compressed when the BDI form leaves
  room for the 31 strong-code check bits inside the 512-bit line, otherwise
  stored uncompressed under SEC-DED;
* reads decode with whichever code the line carries; compressed lines are
  decoded and then decompressed, which is the only latency the scheme adds;
* evictions decode dirty lines in the background.

Each line is modelled as a vector of RTM cells. With SEC-DED storage present
the vector is 523 cells (512 in-line plus 11 out-of-line check cells);
otherwise it is the 512 in-line cells. A compressed codeword occupies the
leading cells of the line and the rest are unused.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

from . import bdi
from .ecc import bch, secded
from .ecc.outcome import Codeword, DecodeStatus
from .faults import FailureKind, FailureRecord, Injector

LINE_BYTES = 64
LINE_BITS = 512
STRONG_BUDGET_BITS = LINE_BITS - bch.R  # 481


class CacheMode(enum.Enum):
    STRONG_ONLY = "strong_only"  # no storage for SEC-DED check bits
    SECDED_PLUS_STRONG = "secded_plus_strong"


class CacheScheme(enum.Enum):
    BASELINE = "baseline"  # SEC-DED on every line, no compression
    PROPOSED = "proposed"


class Path(enum.Enum):
    SECDED = "secded"
    TECQED = "tecqed"
    NONE = "none"


class Outcome(enum.Enum):
    OK = "ok"
    CORRECTED = "corrected"
    REFETCHED = "refetched"
    FAILURE = "failure"
    SILENT_CLEAN = "silent-clean"  # wrong data delivered from a clean line


class Resolution(enum.Enum):
    RECOVERED = "recovered"
    REFETCHED = "refetched"
    FAILURE = "failure"


@dataclass(frozen=True)
class CacheConfig:
    capacity_bytes: int = 2 * 1024 * 1024
    ways: int = 16
    line_bytes: int = LINE_BYTES
    mode: CacheMode = CacheMode.SECDED_PLUS_STRONG
    secded_codec_cycles: int = 1
    tecqed_codec_cycles: int = 3
    compress_cycles: int = 2
    decompress_cycles: int = 1
    base_hit_cycles: int = 10
    miss_penalty_cycles: int = 100

    def __post_init__(self):
        if self.line_bytes != LINE_BYTES:
            raise ValueError(f"line_bytes is fixed at {LINE_BYTES}")
        if self.ways <= 0 or self.capacity_bytes <= 0:
            raise ValueError("capacity and ways must be positive")
        if self.capacity_bytes % (self.ways * self.line_bytes):
            raise ValueError(
                f"capacity {self.capacity_bytes} is not divisible by ways x line size "
                f"({self.ways} x {self.line_bytes})"
            )
        sets = self.num_sets
        if sets & (sets - 1):
            raise ValueError(f"set count {sets} is not a power of two")
        for name in (
            "secded_codec_cycles",
            "tecqed_codec_cycles",
            "compress_cycles",
            "decompress_cycles",
            "base_hit_cycles",
            "miss_penalty_cycles",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def num_sets(self) -> int:
        return self.capacity_bytes // (self.ways * self.line_bytes)


class TagEntry:
    __slots__ = (
        "valid",
        "dirty",
        "compressed",
        "tag",
        "address",
        "recency",
        "cells",
        "golden",
        "ncells",
        "code_bits",
        "size_bits",
        "truth",
        "last_access",
    )

    def __init__(self):
        self.valid = False
        self.dirty = False
        self.compressed = False
        self.tag = 0
        self.address = 0
        self.recency = 0
        self.cells = 0  # current (possibly corrupted) cell contents
        self.golden = 0  # cell contents as written, for the oracle
        self.ncells = 0
        self.code_bits = 0  # codeword length; 0 when the line carries no code
        self.size_bits = 0  # compressed payload length
        self.truth = b""  # architecturally correct payload
        self.last_access = 0

    @property
    def klass(self) -> str:
        if not self.dirty:
            return "clean"
        return "dirty_compressed" if self.compressed else "dirty_uncompressed"


@dataclass
class AccessResult:
    hit: bool
    latency: int = 0
    path: Path = Path.NONE
    outcome: Outcome = Outcome.OK
    data: bytes | None = None
    failures: list[FailureRecord] = field(default_factory=list)
    corrected_bits: int = 0


@dataclass(frozen=True)
class Classification:
    clean: float
    dirty_compressed: float
    dirty_uncompressed: float
    valid_lines: int
    empty: bool = False

    @property
    def dirty(self) -> float:
        return self.dirty_compressed + self.dirty_uncompressed


class Memory:
    """Write-history map; unseen lines hold a fixed pseudo-random pattern."""

    def __init__(self):
        self._lines: dict[int, bytes] = {}

    @staticmethod
    def initial(address: int) -> bytes:
        import hashlib

        return hashlib.blake2b(address.to_bytes(8, "little"), digest_size=64, person=b"rtmsim-mem").digest()

    def load(self, address: int) -> bytes:
        line = self._lines.get(address)
        return line if line is not None else self.initial(address)

    def store(self, address: int, data: bytes) -> None:
        self._lines[address] = data

    def __len__(self):
        return len(self._lines)


class Cache:
    def __init__(
        self,
        config: CacheConfig,
        scheme: CacheScheme = CacheScheme.PROPOSED,
        injector: Injector | None = None,
        memory: Memory | None = None,
    ):
        self.config = config
        self.scheme = scheme
        self.injector = injector
        self.memory = memory if memory is not None else Memory()
        self.sets = [[TagEntry() for _ in range(config.ways)] for _ in range(config.num_sets)]
        self._set_bits = config.num_sets.bit_length() - 1
        self._clock = 0
        self.has_secded = scheme is CacheScheme.BASELINE or config.mode is CacheMode.SECDED_PLUS_STRONG
        self.ncells = secded.N if self.has_secded else LINE_BITS
        self.occupancy_cycles = 0
        self.counts = Counter()  # classification of valid lines
        self.compressed_sizes = Counter()  # size_bits of dirty compressed lines
        self.stats = Counter()

    # -- addressing -------------------------------------------------------

    def index(self, address: int) -> tuple[int, int]:
        line = address >> 6
        return line & (self.config.num_sets - 1), line >> self._set_bits

    def lookup(self, address: int) -> tuple[int, int | None]:
        s, tag = self.index(address)
        for w, e in enumerate(self.sets[s]):
            if e.valid and e.tag == tag:
                return s, w
        return s, None

    def victim(self, set_index: int) -> int:
        ways = self.sets[set_index]
        for w, e in enumerate(ways):
            if not e.valid:
                return w
        return min(range(len(ways)), key=lambda w: ways[w].recency)

    def _touch(self, e: TagEntry, cycle: int) -> None:
        self._clock += 1
        e.recency = self._clock
        e.last_access = cycle

    # -- classification bookkeeping --------------------------------------

    def _account(self, e: TagEntry, sign: int) -> None:
        if not e.valid:
            return
        self.counts[e.klass] += sign
        if e.dirty and e.compressed:
            self.compressed_sizes[e.size_bits] += sign

    def snapshot_classification(self) -> Classification:
        valid = self.counts["clean"] + self.counts["dirty_compressed"] + self.counts["dirty_uncompressed"]
        if valid == 0:
            return Classification(0.0, 0.0, 0.0, 0, empty=True)
        return Classification(
            self.counts["clean"] / valid,
            self.counts["dirty_compressed"] / valid,
            self.counts["dirty_uncompressed"] / valid,
            valid,
        )

    def entries(self):
        for ways in self.sets:
            for e in ways:
                if e.valid:
                    yield e

    # -- storing ----------------------------------------------------------

    def _store(self, e: TagEntry, data: bytes, compressible: bool, cycle: int, address: int) -> Path:
        c = bdi.compress(data, STRONG_BUDGET_BITS) if compressible else None
        if c is not None:
            k = c.size_bits
            cw = bch.encode(bdi.pack(c), k)
            e.compressed = True
            e.size_bits = k
            e.code_bits = cw.n
            cells = cw.bits << (self.ncells - cw.n)
            path = Path.TECQED
        elif self.has_secded:
            cw = secded.encode(data)
            e.compressed = False
            e.size_bits = 0
            e.code_bits = cw.n
            cells = cw.bits
            path = Path.SECDED
        else:
            e.compressed = False
            e.size_bits = 0
            e.code_bits = 0
            cells = int.from_bytes(data, "big")
            path = Path.NONE
        e.ncells = self.ncells
        e.golden = cells
        if self.injector is not None:
            ev = self.injector.next_event(address)
            cells, _ = self.injector.on_write(address, ev, cells, self.ncells)
        e.cells = cells
        e.truth = data
        return path

    def _used_mask(self, e: TagEntry) -> int:
        used = e.code_bits or LINE_BITS
        return ((1 << used) - 1) << (e.ncells - used)

    def injected_weight(self, e: TagEntry) -> int:
        return ((e.cells ^ e.golden) & self._used_mask(e)).bit_count()

    def _install(self, address: int, data: bytes, dirty: bool, cycle: int) -> tuple[TagEntry, Path, list[FailureRecord]]:
        s, tag = self.index(address)
        w = self.victim(s)
        e = self.sets[s][w]
        failures = []
        if e.valid:
            failure = self.evict(s, w, cycle)
            if failure is not None:
                failures.append(failure)
        compressible = dirty and self.scheme is CacheScheme.PROPOSED
        path = self._store(e, data, compressible, cycle, address)
        e.valid = True
        e.dirty = dirty
        e.tag = tag
        e.address = address
        self._touch(e, cycle)
        self._account(e, +1)
        return e, path, failures

    # -- sensing ----------------------------------------------------------

    def _sense(self, e: TagEntry, cycle: int) -> tuple[DecodeStatus, bytes | None, Path, int]:
        """Apply pre-read errors, decode, return (status, data, path, corrected count)."""
        if self.injector is not None:
            ev = self.injector.next_event(e.address)
            e.cells, _ = self.injector.before_read(e.address, ev, e.cells, e.ncells, cycle - e.last_access)
        if e.compressed:
            n = e.code_bits
            out = bch.decode(Codeword(e.cells >> (e.ncells - n), n), e.size_bits)
            if not out.ok:
                return out.status, None, Path.TECQED, 0
            try:
                data = bdi.decompress(bdi.unpack(out.data, e.size_bits))
            except bdi.CorruptLineError:
                # an ECC escape produced an impossible payload; no valid data to deliver
                return out.status, b"", Path.TECQED, out.count
            return out.status, data, Path.TECQED, out.count
        if e.code_bits:
            out = secded.decode(Codeword(e.cells, e.ncells))
            if not out.ok:
                return out.status, None, Path.SECDED, 0
            return out.status, out.data.to_bytes(LINE_BYTES, "big"), Path.SECDED, out.count
        return DecodeStatus.NO_ERROR, (e.cells & ((1 << LINE_BITS) - 1)).to_bytes(LINE_BYTES, "big"), Path.NONE, 0

    def _scrub(self, e: TagEntry) -> None:
        e.cells = e.golden

    def _failure(self, e: TagEntry, cycle: int, kind: FailureKind) -> FailureRecord:
        self.stats["failures"] += 1
        return FailureRecord(cycle, e.address, kind, max(1, self.injected_weight(e)))

    def resolve_error(self, e: TagEntry, status: DecodeStatus) -> Resolution:
        if status is DecodeStatus.NO_ERROR:
            raise ValueError("resolve_error needs an erroneous decode")
        if status is DecodeStatus.CORRECTED:
            self._scrub(e)
            self.stats["corrected"] += 1
            return Resolution.RECOVERED
        if not e.dirty:
            self._account(e, -1)
            e.valid = False
            self.stats["refetched"] += 1
            return Resolution.REFETCHED
        return Resolution.FAILURE

    # -- requests ---------------------------------------------------------

    def handle_read(self, address: int, cycle: int = 0) -> AccessResult:
        s, w = self.lookup(address)
        if w is None:
            return AccessResult(hit=False)
        e = self.sets[s][w]
        cfg = self.config
        self._touch(e, cycle)
        status, data, path, ncorr = self._sense(e, cycle)
        latency = cfg.base_hit_cycles
        if path is Path.TECQED:
            latency += cfg.tecqed_codec_cycles + cfg.decompress_cycles
        elif path is Path.SECDED:
            latency += cfg.secded_codec_cycles
        res = AccessResult(hit=True, latency=latency, path=path)

        if status is DecodeStatus.DETECTED_UNCORRECTABLE:
            if self.resolve_error(e, status) is Resolution.REFETCHED:
                res.outcome = Outcome.REFETCHED
                return res
            res.outcome = Outcome.FAILURE
            res.failures.append(self._failure(e, cycle, FailureKind.DETECTED_UNCORRECTABLE))
            self._after_read(e)
            return res

        if data != e.truth:
            if e.dirty:
                res.outcome = Outcome.FAILURE
                res.failures.append(self._failure(e, cycle, FailureKind.SILENT_DATA_CORRUPTION))
            else:
                res.outcome = Outcome.SILENT_CLEAN
                self.stats["silent_clean"] += 1
            res.data = data
            self._after_read(e)
            return res

        if status is DecodeStatus.CORRECTED:
            self.resolve_error(e, status)
            res.outcome = Outcome.CORRECTED
            res.corrected_bits = ncorr
        res.data = data
        self._after_read(e)
        return res

    def _after_read(self, e: TagEntry) -> None:
        if self.injector is not None:
            ev = self.injector.next_event(e.address)
            e.cells, _ = self.injector.after_read(e.address, ev, e.cells, e.ncells)

    def handle_fill(self, address: int, data: bytes, cycle: int = 0) -> AccessResult:
        if len(data) != LINE_BYTES:
            raise ValueError("fill payload must be 64 bytes")
        s, w = self.lookup(address)
        if w is not None:
            raise ValueError(f"fill of resident line {address:#x}")
        _, path, failures = self._install(address, data, dirty=False, cycle=cycle)
        latency = self.config.base_hit_cycles
        if path is Path.SECDED:
            latency += self.config.secded_codec_cycles
        outcome = Outcome.FAILURE if failures else Outcome.OK
        return AccessResult(hit=False, latency=latency, path=path, outcome=outcome, failures=failures)

    def handle_writeback(self, address: int, data: bytes, cycle: int = 0) -> AccessResult:
        if len(data) != LINE_BYTES:
            raise ValueError("write-back payload must be 64 bytes")
        cfg = self.config
        s, w = self.lookup(address)
        failures = []
        if w is None:
            hit = False
            e, path, failures = self._install(address, data, dirty=True, cycle=cycle)
        else:
            hit = True
            e = self.sets[s][w]
            self._account(e, -1)
            path = self._store(e, data, self.scheme is CacheScheme.PROPOSED, cycle, address)
            e.dirty = True
            self._touch(e, cycle)
            self._account(e, +1)
        if self.scheme is CacheScheme.PROPOSED:
            self.occupancy_cycles += cfg.compress_cycles
        if path is Path.TECQED:
            self.occupancy_cycles += cfg.tecqed_codec_cycles
        elif path is Path.SECDED:
            self.occupancy_cycles += cfg.secded_codec_cycles
        outcome = Outcome.FAILURE if failures else Outcome.OK
        return AccessResult(hit=hit, latency=cfg.base_hit_cycles, path=path, outcome=outcome, failures=failures)

    def evict(self, set_index: int, way: int, cycle: int = 0) -> FailureRecord | None:
        """Remove a valid line; dirty data is decoded in the background and written to memory."""
        e = self.sets[set_index][way]
        if not e.valid:
            raise ValueError("evicting an invalid way")
        self._account(e, -1)
        e.valid = False
        self.stats["evictions"] += 1
        if not e.dirty:
            return None
        cfg = self.config
        status, data, path, _ = self._sense(e, cycle)
        if path is Path.TECQED:
            self.occupancy_cycles += cfg.tecqed_codec_cycles + cfg.decompress_cycles
        elif path is Path.SECDED:
            self.occupancy_cycles += cfg.secded_codec_cycles
        self.memory.store(e.address, e.truth)
        self.stats["writebacks_to_memory"] += 1
        if status is DecodeStatus.DETECTED_UNCORRECTABLE:
            return self._failure(e, cycle, FailureKind.DETECTED_UNCORRECTABLE)
        if data != e.truth:
            return self._failure(e, cycle, FailureKind.SILENT_DATA_CORRUPTION)
        return None
