"""Trace replay against one cache instance.

The simulator owns the clock (each trace record occupies
``request_interval`` cycles regardless of scheme, so two schemes replaying
the same trace share a timeline), the memory model, and the miss / refetch
loop around :meth:`Cache.handle_read`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .cache import AccessResult, Cache, CacheConfig, CacheScheme, Memory, Outcome, Path
from .faults import ErrorRates, FailureRecord, Injector, RtmLayout
from .trace import TraceRecord

MAX_REFETCH = 4

EVENT_COLUMNS = ("cycle", "kind", "address", "hit", "path", "latency", "outcome")


@dataclass(frozen=True)
class Event:
    cycle: int
    kind: str
    address: int
    hit: bool
    path: Path
    latency: int
    outcome: Outcome
    compressed_hit: bool = False

    def row(self) -> tuple:
        return (
            self.cycle,
            self.kind,
            f"{self.address:#x}",
            "hit" if self.hit else "miss",
            self.path.value,
            self.latency,
            self.outcome.value,
        )


@dataclass
class RunStats:
    requests: int = 0
    total_latency: int = 0
    reads: int = 0
    writes: int = 0
    read_latency: int = 0
    write_latency: int = 0
    hits: int = 0
    misses: int = 0
    compressed_read_hits: int = 0
    path_counts: Counter = field(default_factory=Counter)
    outcome_counts: Counter = field(default_factory=Counter)
    snapshots: int = 0
    clean_sum: float = 0.0
    dirty_compressed_sum: float = 0.0
    dirty_uncompressed_sum: float = 0.0
    size_sums: Counter = field(default_factory=Counter)
    reuse_sum: int = 0
    reuse_count: int = 0
    last_cycle: int = 0

    def add(self, ev: Event) -> None:
        self.requests += 1
        self.total_latency += ev.latency
        if ev.kind == "read":
            self.reads += 1
            self.read_latency += ev.latency
            if ev.compressed_hit:
                self.compressed_read_hits += 1
        else:
            self.writes += 1
            self.write_latency += ev.latency
        if ev.hit:
            self.hits += 1
        else:
            self.misses += 1
        self.path_counts[(ev.kind, ev.path.value)] += 1
        self.outcome_counts[ev.outcome.value] += 1
        self.last_cycle = ev.cycle

    def snapshot(self, cache: Cache) -> None:
        c = cache.snapshot_classification()
        if c.empty:
            return
        self.snapshots += 1
        self.clean_sum += c.clean
        self.dirty_compressed_sum += c.dirty_compressed
        self.dirty_uncompressed_sum += c.dirty_uncompressed
        total = sum(cache.compressed_sizes.values())
        if total:
            for size, count in cache.compressed_sizes.items():
                if count:
                    self.size_sums[size] += c.dirty_compressed * count / total

    @property
    def mean_latency(self) -> float:
        return self.total_latency / self.requests if self.requests else 0.0


class Simulator:
    def __init__(
        self,
        cache_config: CacheConfig,
        scheme: CacheScheme = CacheScheme.PROPOSED,
        rates: ErrorRates | None = None,
        seed: int = 0,
        trial: int = 0,
        layout: RtmLayout | None = None,
        request_interval: int = 10,
    ):
        injector = None
        if rates is not None and not rates.all_zero:
            injector = Injector(rates, seed, trial, layout)
        self.memory = Memory()
        self.cache = Cache(cache_config, scheme, injector, self.memory)
        self.request_interval = request_interval
        self.failures: list[FailureRecord] = []
        self.index = 0
        self._last_seen: dict[int, int] = {}
        self.reuse_sum = 0
        self.reuse_count = 0

    @property
    def cycle(self) -> int:
        return self.index * self.request_interval

    def _serve_read(self, address: int, cycle: int) -> tuple[AccessResult, int, bool, bool]:
        """Read with miss fill and clean-line refetch; returns (final result, latency, first-hit, refetched)."""
        cache = self.cache
        cfg = cache.config
        r = cache.handle_read(address, cycle)
        first_hit = r.hit
        latency = 0
        refetched = False
        failures = []
        for _ in range(MAX_REFETCH + 1):
            if r.hit and r.outcome is not Outcome.REFETCHED:
                break
            if r.outcome is Outcome.REFETCHED:
                refetched = True
            latency += r.latency
            fill = cache.handle_fill(address, self.memory.load(address), cycle)
            failures.extend(fill.failures)
            latency += cfg.miss_penalty_cycles + fill.latency
            r = cache.handle_read(address, cycle)
        latency += r.latency
        r.failures[:0] = failures
        if r.outcome is Outcome.REFETCHED:
            # repeated detection on fresh fills: serve straight from memory
            r.data = self.memory.load(address)
            latency += cfg.miss_penalty_cycles
        return r, latency, first_hit, refetched

    def step(self, rec: TraceRecord) -> tuple[Event, bytes | None]:
        cycle = self.cycle
        address = rec.line_address
        prev = self._last_seen.get(address)
        if prev is not None:
            self.reuse_sum += cycle - prev
            self.reuse_count += 1
        self._last_seen[address] = cycle
        data = None
        if rec.op == "W":
            r = self.cache.handle_writeback(address, rec.payload, cycle)
            outcome = Outcome.FAILURE if r.failures else r.outcome
            ev = Event(cycle, "writeback", address, r.hit, r.path, r.latency, outcome)
        else:
            r, latency, hit, refetched = self._serve_read(address, cycle)
            data = r.data
            if r.failures or r.outcome is Outcome.FAILURE:
                outcome = Outcome.FAILURE
            elif refetched:
                outcome = Outcome.REFETCHED
            else:
                outcome = r.outcome
            ev = Event(cycle, "read", address, hit, r.path, latency, outcome, hit and r.path is Path.TECQED)
        self.failures.extend(r.failures)
        self.index += 1
        return ev, data

    def run(
        self,
        records: Iterable[TraceRecord],
        *,
        stop_on_failure: bool = False,
        cycle_cap: int | None = None,
        sink: Callable[[Event], None] | None = None,
        stats: RunStats | None = None,
        snapshot_interval: int = 0,
        warmup: int = 0,
    ) -> bool:
        """Replay ``records``; returns True if it stopped early (failure or cap)."""
        for rec in records:
            if cycle_cap is not None and self.cycle >= cycle_cap:
                return True
            ev, _ = self.step(rec)
            if sink is not None:
                sink(ev)
            if stats is not None and self.index > warmup:
                stats.add(ev)
                if snapshot_interval and self.index % snapshot_interval == 0:
                    stats.snapshot(self.cache)
            if stop_on_failure and self.failures:
                return True
        return False


def replay(
    records: Iterable[TraceRecord],
    cache_config: CacheConfig,
    scheme: CacheScheme,
    *,
    rates: ErrorRates | None = None,
    seed: int = 0,
    request_interval: int = 10,
    snapshot_interval: int = 1000,
    warmup: int = 0,
    sink: Callable[[Event], None] | None = None,
    layout: RtmLayout | None = None,
) -> tuple[RunStats, Simulator]:
    sim = Simulator(cache_config, scheme, rates, seed, 0, layout, request_interval)
    stats = RunStats()
    sim.run(records, sink=sink, stats=stats, snapshot_interval=snapshot_interval, warmup=warmup)
    if stats.snapshots == 0:
        stats.snapshot(sim.cache)
    stats.reuse_sum, stats.reuse_count = sim.reuse_sum, sim.reuse_count
    return stats, sim
