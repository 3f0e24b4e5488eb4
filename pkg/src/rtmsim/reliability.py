"""Vulnerability breakdown, analytic and Monte Carlo MTTF, and the latency proxy."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cache import CacheConfig, CacheMode, CacheScheme, Path
from .config import Config
from .ecc import bch, secded
from .faults import ErrorRates, retention_probability
from .sim import RunStats, Simulator, replay
from .trace import TraceRecord

# -- binomial tail ----------------------------------------------------------


def _check_tail_args(n: int, p: float, t: int) -> None:
    if n < 0 or not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got n={n}, t={t}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")


def log_p_uncorrectable(n: int, p: float, t: int) -> float:
    """Natural log of P(more than ``t`` of ``n`` independent bits flip)."""
    _check_tail_args(n, p, t)
    if t >= n or p == 0.0:
        return -math.inf
    if p == 1.0:
        return 0.0
    lp, lq = math.log(p), math.log1p(-p)
    lgn = math.lgamma(n + 1)
    terms = [lgn - math.lgamma(i + 1) - math.lgamma(n - i + 1) + i * lp + (n - i) * lq for i in range(t + 1, n + 1)]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(x - top) for x in terms))


def p_uncorrectable(n: int, p: float, t: int) -> float:
    """P(more than ``t`` of ``n`` bits flip), each independently with probability ``p``."""
    return math.exp(log_p_uncorrectable(n, p, t))


def xor_combine(*probs: float) -> float:
    """Flip probability of a bit exposed to independent flip events (two flips cancel)."""
    prod = 1.0
    for p in probs:
        prod *= 1.0 - 2.0 * p
    return (1.0 - prod) / 2.0


@dataclass(frozen=True)
class Exposure:
    """Per-check exposure of a stored line.

    Between two checks a line sees one write, one read disturbance and
    ``idle_cycles`` of retention; one access happens every
    ``1 / access_rate`` cycles.
    """

    idle_cycles: float = 0.0
    access_rate: float = 0.1
    writes: int = 1
    reads: int = 1

    def bit_error_probability(self, rates: ErrorRates) -> float:
        probs = [rates.write_failure] * self.writes + [rates.read_disturb] * self.reads
        probs.append(retention_probability(rates.retention, int(round(self.idle_cycles))))
        return xor_combine(*probs)


# -- vulnerability ------------------------------------------------------------


@dataclass(frozen=True)
class VulnerabilityReport:
    clean: float
    dirty_compressed: float
    dirty_uncompressed: float
    # share of all valid lines held compressed at each payload size
    compressed_sizes: dict = field(default_factory=dict)
    mode: CacheMode = CacheMode.SECDED_PLUS_STRONG
    mean_reuse_cycles: float = 0.0
    empty: bool = False

    def __post_init__(self):
        total = self.clean + self.dirty_compressed + self.dirty_uncompressed
        if not self.empty and abs(total - 1.0) > 1e-9:
            raise ValueError(f"class fractions sum to {total!r}")

    @property
    def baseline_vulnerable(self) -> float:
        return self.dirty_compressed + self.dirty_uncompressed

    @property
    def proposed_vulnerable(self) -> float:
        return self.dirty_uncompressed

    @classmethod
    def from_stats(cls, stats: RunStats, mode: CacheMode) -> VulnerabilityReport:
        if stats.snapshots == 0:
            return cls(0.0, 0.0, 0.0, {}, mode, empty=True)
        k = stats.snapshots
        clean, dc, du = stats.clean_sum / k, stats.dirty_compressed_sum / k, stats.dirty_uncompressed_sum / k
        total = clean + dc + du
        sizes = {int(s): v / k / total for s, v in sorted(stats.size_sums.items())}
        reuse = stats.reuse_sum / stats.reuse_count if stats.reuse_count else 0.0
        return cls(clean / total, dc / total, du / total, sizes, mode, reuse)

    def as_dict(self) -> dict:
        return {
            "clean": self.clean,
            "dirty_compressed": self.dirty_compressed,
            "dirty_uncompressed": self.dirty_uncompressed,
            "baseline_vulnerable": self.baseline_vulnerable,
            "proposed_vulnerable": self.proposed_vulnerable,
            "compressed_sizes": {str(k): v for k, v in self.compressed_sizes.items()},
            "mode": self.mode.value,
            "mean_reuse_cycles": self.mean_reuse_cycles,
            "empty": self.empty,
        }


def vulnerability_report(records, cache_config: CacheConfig, *, request_interval=10, snapshot_interval=1000, warmup=0):
    stats, _ = replay(
        records,
        cache_config,
        CacheScheme.PROPOSED,
        request_interval=request_interval,
        snapshot_interval=snapshot_interval,
        warmup=warmup,
    )
    return VulnerabilityReport.from_stats(stats, cache_config.mode), stats


# -- analytic MTTF --------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticMttf:
    baseline_rate: float  # failures per cycle
    proposed_rate: float
    ratio: float
    infinite: bool
    bit_error_probability: float

    @property
    def baseline_mttf(self) -> float:
        return math.inf if self.baseline_rate == 0 else 1.0 / self.baseline_rate

    @property
    def proposed_mttf(self) -> float:
        return math.inf if self.proposed_rate == 0 else 1.0 / self.proposed_rate

    def as_dict(self) -> dict:
        return {
            "baseline_rate": self.baseline_rate,
            "proposed_rate": self.proposed_rate,
            "baseline_mttf_cycles": _num(self.baseline_mttf),
            "proposed_mttf_cycles": _num(self.proposed_mttf),
            "ratio": _num(self.ratio),
            "infinite": self.infinite,
            "bit_error_probability": self.bit_error_probability,
        }


def _num(x: float):
    return x if math.isfinite(x) else None


def analytic_mttf(report: VulnerabilityReport, rates: ErrorRates, exposure: Exposure | None = None) -> AnalyticMttf:
    exposure = exposure or Exposure(idle_cycles=report.mean_reuse_cycles)
    p = exposure.bit_error_probability(rates)
    secded_fail = p_uncorrectable(secded.N, p, 1)
    baseline = report.baseline_vulnerable * secded_fail
    if report.mode is CacheMode.SECDED_PLUS_STRONG:
        proposed = report.dirty_uncompressed * secded_fail
    else:
        proposed = report.dirty_uncompressed * p_uncorrectable(512, p, 0)
    sizes = report.compressed_sizes or ({512 - bch.R: report.dirty_compressed} if report.dirty_compressed else {})
    weight = sum(sizes.values())
    for size, share in sizes.items():
        frac = report.dirty_compressed * share / weight
        proposed += frac * p_uncorrectable(int(size) + bch.R, p, bch.T)
    baseline *= exposure.access_rate
    proposed *= exposure.access_rate
    if proposed == 0:
        ratio, infinite = (math.inf, True)
    else:
        ratio, infinite = baseline / proposed, False
    return AnalyticMttf(baseline, proposed, ratio, infinite, p)


def analytic_mttf_ratio(report: VulnerabilityReport, rates: ErrorRates, exposure: Exposure | None = None) -> float:
    return analytic_mttf(report, rates, exposure).ratio


# -- Monte Carlo MTTF ---------------------------------------------------------------


@dataclass(frozen=True)
class TrialRow:
    scheme: str
    trial: int
    cycles: int
    failed: bool
    kind: str
    address: int
    injected_weight: int
    requests: int

    def row(self) -> tuple:
        return (
            self.scheme,
            self.trial,
            self.cycles,
            int(self.failed),
            self.kind,
            f"{self.address:#x}" if self.failed else "",
            self.injected_weight,
            self.requests,
        )


TRIAL_COLUMNS = ("scheme", "trial", "cycles", "failed", "kind", "address", "injected_weight", "requests")


@dataclass(frozen=True)
class MttfReport:
    scheme: str
    trials: int
    failures: int
    censored: int
    mean: float | None  # mean time to first failure over uncensored trials
    ci_low: float | None
    ci_high: float | None
    mle: float | None  # total exposure / failures; equals mean when nothing is censored
    ci_method: str

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def mean_ci(values, confidence: float = 0.95, seed: int = 0) -> tuple[float, float, float, str]:
    """Normal-approximation CI for 30+ samples, percentile bootstrap below that."""
    x = np.asarray(values, dtype=np.float64)
    m = float(x.mean())
    if len(x) == 1:
        return m, m, m, "single"
    if len(x) >= 30:
        from statistics import NormalDist

        z = NormalDist().inv_cdf(0.5 + confidence / 2)
        half = z * float(x.std(ddof=1)) / math.sqrt(len(x))
        return m, m - half, m + half, "normal"
    rng = np.random.Generator(np.random.PCG64(seed))
    means = rng.choice(x, size=(2000, len(x)), replace=True).mean(axis=1)
    lo, hi = np.quantile(means, [(1 - confidence) / 2, (1 + confidence) / 2])
    return m, min(float(lo), m), max(float(hi), m), "bootstrap"


def run_trial(records: list[TraceRecord], config: Config, scheme: CacheScheme, seed: int, trial: int) -> TrialRow:
    """Replay (looping) until the first failure on dirty data or the cycle cap."""
    sim = Simulator(
        config.cache, scheme, config.rates, seed, trial, config.layout, config.sim.request_interval
    )
    cap = config.sim.cycle_cap
    if not records or config.rates.all_zero:
        return TrialRow(scheme.value, trial, cap, False, "censored", 0, 0, 0)
    stopped = False
    while not stopped:
        stopped = sim.run(records, stop_on_failure=True, cycle_cap=cap)
    if sim.failures:
        f = sim.failures[0]
        return TrialRow(scheme.value, trial, f.cycle, True, f.kind.value, f.address, f.injected_weight, sim.index)
    return TrialRow(scheme.value, trial, cap, False, "censored", 0, 0, sim.index)


_WORKER_RECORDS: list[TraceRecord] = []


def _init_worker(records):
    global _WORKER_RECORDS
    _WORKER_RECORDS = records


def _trial_job(args):
    config, scheme, seed, trial = args
    return run_trial(_WORKER_RECORDS, config, scheme, seed, trial)


def summarize(rows: list[TrialRow], scheme: str, seed: int = 0) -> MttfReport:
    mine = [r for r in rows if r.scheme == scheme]
    times = [r.cycles for r in mine if r.failed]
    censored = len(mine) - len(times)
    if not times:
        return MttfReport(scheme, len(mine), 0, censored, None, None, None, None, "none")
    m, lo, hi, method = mean_ci(times, seed=seed)
    mle = sum(r.cycles for r in mine) / len(times)
    return MttfReport(scheme, len(mine), len(times), censored, m, lo, hi, mle, method)


@dataclass(frozen=True)
class MonteCarloResult:
    reports: dict
    rows: list
    ratio: float | None  # proposed / baseline MTTF (exposure-based estimate)

    def as_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "schemes": {k: v.as_dict() for k, v in self.reports.items()},
        }


def monte_carlo_mttf(
    records: list[TraceRecord],
    config: Config,
    trials: int | None = None,
    seed: int | None = None,
    schemes=(CacheScheme.BASELINE, CacheScheme.PROPOSED),
    workers: int | None = None,
) -> MonteCarloResult:
    """Both schemes replay each trial with the same seed, hence the same flip history per line event."""
    trials = config.sim.trials if trials is None else trials
    seed = config.sim.seed if seed is None else seed
    workers = config.sim.workers if workers is None else workers
    if trials < 1:
        raise ValueError("trials must be at least 1")
    records = list(records)
    jobs = [(config, scheme, seed, t) for t in range(trials) for scheme in schemes]
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(records,)) as pool:
            rows = list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [run_trial(records, config, scheme, seed, t) for config, scheme, seed, t in jobs]
    reports = {s.value: summarize(rows, s.value, seed) for s in schemes}
    ratio = None
    b, p = reports.get("baseline"), reports.get("proposed")
    if b is not None and p is not None and b.mle and p.mle:
        ratio = p.mle / b.mle
    return MonteCarloResult(reports, rows, ratio)


# -- latency proxy -------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeLatency:
    total_cycles: int
    requests: int
    reads: int
    read_cycles: int
    compressed_read_hits: int
    path_counts: dict
    occupancy_cycles: int

    @property
    def average(self) -> float:
        return self.total_cycles / self.requests if self.requests else 0.0

    @property
    def read_average(self) -> float:
        return self.read_cycles / self.reads if self.reads else 0.0

    def as_dict(self) -> dict:
        return {
            "total_cycles": self.total_cycles,
            "requests": self.requests,
            "average_latency": self.average,
            "reads": self.reads,
            "read_cycles": self.read_cycles,
            "read_average_latency": self.read_average,
            "compressed_read_hits": self.compressed_read_hits,
            "path_counts": {f"{k}:{p}": v for (k, p), v in sorted(self.path_counts.items())},
            "occupancy_cycles": self.occupancy_cycles,
        }


@dataclass(frozen=True)
class LatencyReport:
    baseline: SchemeLatency
    proposed: SchemeLatency

    @property
    def slowdown(self) -> float:
        return self.proposed.total_cycles / self.baseline.total_cycles if self.baseline.total_cycles else 1.0

    @property
    def read_slowdown(self) -> float:
        return self.proposed.read_cycles / self.baseline.read_cycles if self.baseline.read_cycles else 1.0

    def as_dict(self) -> dict:
        return {
            "baseline": self.baseline.as_dict(),
            "proposed": self.proposed.as_dict(),
            "slowdown": self.slowdown,
            "read_slowdown": self.read_slowdown,
        }


def _scheme_latency(stats: RunStats, sim: Simulator) -> SchemeLatency:
    return SchemeLatency(
        stats.total_latency,
        stats.requests,
        stats.reads,
        stats.read_latency,
        stats.compressed_read_hits,
        dict(stats.path_counts),
        sim.cache.occupancy_cycles,
    )


def latency_proxy(records, cache_config: CacheConfig, *, request_interval: int = 10, sink_baseline=None, sink_proposed=None):
    """Replay the same records error-free under both schemes; returns (LatencyReport, proposed stats)."""
    records = list(records)
    b_stats, b_sim = replay(records, cache_config, CacheScheme.BASELINE, request_interval=request_interval, sink=sink_baseline)
    p_stats, p_sim = replay(records, cache_config, CacheScheme.PROPOSED, request_interval=request_interval, sink=sink_proposed)
    return LatencyReport(_scheme_latency(b_stats, b_sim), _scheme_latency(p_stats, p_sim)), p_stats


__all__ = [
    "AnalyticMttf",
    "Exposure",
    "LatencyReport",
    "MonteCarloResult",
    "MttfReport",
    "Path",
    "TRIAL_COLUMNS",
    "TrialRow",
    "VulnerabilityReport",
    "analytic_mttf",
    "analytic_mttf_ratio",
    "latency_proxy",
    "log_p_uncorrectable",
    "mean_ci",
    "monte_carlo_mttf",
    "p_uncorrectable",
    "run_trial",
    "summarize",
    "vulnerability_report",
    "xor_combine",
]
