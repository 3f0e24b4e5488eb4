"""Command-line harness: ``rtmsim {simulate,sweep,gen-trace,ecc-selftest}``.

Exit status: 0 on success, 1 when a self-test fails, 2 on usage or
configuration errors. ``RTMSIM_SEED`` in the environment overrides
``--seed``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cache import CacheScheme
from .config import RATE_KEYS, Config, ConfigError, build, dump_config, load_config
from .reliability import (
    TRIAL_COLUMNS,
    Exposure,
    analytic_mttf,
    latency_proxy,
    monte_carlo_mttf,
    vulnerability_report,
)
from .report import CsvSink, write_csv, write_json
from .sim import EVENT_COLUMNS, Simulator
from .trace import TraceError, generate_trace, load_profile, parse_trace

EXIT_OK, EXIT_SELFTEST, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _seed(args, fallback: int) -> int:
    env = os.environ.get("RTMSIM_SEED")
    if env is not None:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"RTMSIM_SEED must be an integer, got {env!r}") from None
    return args.seed if args.seed is not None else fallback


def _load(args) -> Config:
    config = load_config(args.config)
    seed = _seed(args, config.sim.seed)
    trials = getattr(args, "trials", None)
    changes = {"sim.seed": seed}
    if trials is not None:
        changes["sim.trials"] = trials
    return build(changes, config)


def _schemes(mode: str) -> list[CacheScheme]:
    return {
        "baseline": [CacheScheme.BASELINE],
        "proposed": [CacheScheme.PROPOSED],
        "both": [CacheScheme.BASELINE, CacheScheme.PROPOSED],
    }[mode]


def _exposure(vuln, stats, config: Config) -> Exposure:
    reads_per_cycle = stats.reads / (stats.requests * config.sim.request_interval) if stats.requests else 0.0
    return Exposure(idle_cycles=vuln.mean_reuse_cycles, access_rate=reads_per_cycle or 1.0)


def cmd_simulate(args) -> int:
    config = _load(args)
    trace = Path(args.trace)
    if not trace.is_file():
        raise UsageError(f"trace file not found: {trace}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    schemes = _schemes(args.mode)
    sim_cfg = config.sim

    # one injected pass per scheme for the event log (trial 0, runs past failures)
    event_counts = {}
    for scheme in schemes:
        sim = Simulator(config.cache, scheme, config.rates, sim_cfg.seed, 0, config.layout, sim_cfg.request_interval)
        with CsvSink(out / f"events_{scheme.value}.csv", EVENT_COLUMNS) as sink:
            sim.run(parse_trace(trace), sink=sink)
            event_counts[scheme.value] = {"events": sink.rows, "failures": len(sim.failures)}

    vuln, stats = vulnerability_report(
        parse_trace(trace),
        config.cache,
        request_interval=sim_cfg.request_interval,
        snapshot_interval=sim_cfg.snapshot_interval,
        warmup=sim_cfg.warmup,
    )
    analytic = analytic_mttf(vuln, config.rates, _exposure(vuln, stats, config))
    latency = None
    if args.mode == "both":
        latency, _ = latency_proxy(parse_trace(trace), config.cache, request_interval=sim_cfg.request_interval)

    mc = monte_carlo_mttf(list(parse_trace(trace)), config, schemes=schemes)
    write_csv(out / "trials.csv", TRIAL_COLUMNS, (r.row() for r in mc.rows))

    report = {
        "tool": f"rtmsim {__version__}",
        "trace": trace.name,
        "config": dump_config(config),
        "mode": args.mode,
        "events": event_counts,
        "vulnerability": vuln.as_dict(),
        "analytic_mttf": analytic.as_dict(),
        "monte_carlo": mc.as_dict(),
        "latency": latency.as_dict() if latency is not None else None,
    }
    write_json(out / "report.json", report)

    from . import plots

    plots.vulnerability_figure(vuln, out / "vulnerability.png")
    plots.mttf_figure(analytic, mc, out / "mttf.png")

    print(f"baseline vulnerable: {100 * vuln.baseline_vulnerable:.2f}%")
    print(f"proposed vulnerable: {100 * vuln.proposed_vulnerable:.2f}%")
    print(f"analytic MTTF ratio: {analytic.ratio:.4g}")
    if mc.ratio is not None:
        print(f"Monte Carlo MTTF ratio: {mc.ratio:.4g}")
    for name, r in mc.reports.items():
        print(f"{name}: {r.failures}/{r.trials} trials failed, {r.censored} censored")
    if latency is not None:
        print(f"latency slowdown: {100 * (latency.slowdown - 1):.3f}%")
    print(f"reports written to {out}")
    return EXIT_OK


def _grid(lo: float, hi: float, points: int, scale: str) -> list[float]:
    if points < 1:
        raise UsageError("--points must be at least 1")
    if scale == "log":
        if lo <= 0 or hi <= 0:
            raise UsageError("log-scale sweep needs positive endpoints")
        return [float(v) for v in np.geomspace(lo, hi, points)]
    return [float(v) for v in np.linspace(lo, hi, points)]


SWEEP_COLUMNS = (
    "key",
    "value",
    "bit_error_probability",
    "baseline_mttf",
    "proposed_mttf",
    "analytic_ratio",
    "mc_trials",
    "mc_baseline_mttf",
    "mc_proposed_mttf",
    "mc_ratio",
)


def cmd_sweep(args) -> int:
    if args.rate_key not in RATE_KEYS:
        raise UsageError(f"--rate-key must be one of: {', '.join(RATE_KEYS)}")
    config = _load(args)
    trace = Path(args.trace)
    if not trace.is_file():
        raise UsageError(f"trace file not found: {trace}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = _grid(getattr(args, "from"), args.to, args.points, args.scale)
    vuln, stats = vulnerability_report(
        parse_trace(trace),
        config.cache,
        request_interval=config.sim.request_interval,
        snapshot_interval=config.sim.snapshot_interval,
        warmup=config.sim.warmup,
    )
    exposure = _exposure(vuln, stats, config)
    records = list(parse_trace(trace)) if args.trials else None
    rows = []
    for value in grid:
        point = build({args.rate_key: value}, config)
        a = analytic_mttf(vuln, point.rates, exposure)
        row = {
            "key": args.rate_key,
            "value": value,
            "bit_error_probability": a.bit_error_probability,
            "baseline_mttf": a.baseline_mttf,
            "proposed_mttf": a.proposed_mttf,
            "analytic_ratio": a.ratio,
            "mc_trials": args.trials,
            "mc_baseline_mttf": None,
            "mc_proposed_mttf": None,
            "mc_ratio": None,
        }
        if args.trials:
            mc = monte_carlo_mttf(records, point, trials=args.trials)
            row["mc_baseline_mttf"] = mc.reports["baseline"].mle
            row["mc_proposed_mttf"] = mc.reports["proposed"].mle
            row["mc_ratio"] = mc.ratio
        rows.append(row)
        print(f"{args.rate_key}={value:.6g}: analytic ratio {a.ratio:.4g}")
    fmt = lambda v: "" if v is None else v  # noqa: E731
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, ([fmt(r[c]) for c in SWEEP_COLUMNS] for r in rows))

    from . import plots

    plots.sweep_figure(args.rate_key, rows, out / "sweep.png")
    print(f"sweep written to {out}")
    return EXIT_OK


def cmd_gen_trace(args) -> int:
    profile = load_profile(args.profile)
    changes = {}
    if args.length is not None:
        changes["length"] = args.length
    seed = _seed(args, profile.seed)
    if seed != profile.seed:
        changes["seed"] = seed
    if changes:
        try:
            profile = profile.with_(**changes)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    n = generate_trace(profile, out)
    print(f"wrote {n} records to {out}")
    return EXIT_OK


def cmd_ecc_selftest(args) -> int:
    from .ecc.selftest import golden_suite, secded_suite, tecqed_suite

    if args.exhaustive_weight < 0 or args.samples < 1:
        raise UsageError("--exhaustive-weight must be >= 0 and --samples >= 1")
    results = secded_suite(args.exhaustive_weight, args.samples)
    for k in args.k:
        for r in tecqed_suite(k, args.exhaustive_weight, args.samples):
            if len(args.k) > 1:
                r.name = f"{r.name} (k={k})"
            results.append(r)
    results.append(golden_suite())
    for r in results:
        print(("PASS " if r.ok else "FAIL ") + r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rtmsim", description="Racetrack LLC reliability simulator")
    p.add_argument("--version", action="version", version=f"rtmsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="replay a trace: event logs, vulnerability, MTTF and latency reports")
    s.add_argument("--config", required=True)
    s.add_argument("--trace", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--mode", choices=("baseline", "proposed", "both"), default="both")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="MTTF over a grid of one error rate")
    w.add_argument("--config", required=True)
    w.add_argument("--trace", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--rate-key", required=True, help=f"one of {', '.join(RATE_KEYS)}")
    w.add_argument("--from", type=float, required=True)
    w.add_argument("--to", type=float, required=True)
    w.add_argument("--points", type=int, default=5)
    w.add_argument("--scale", choices=("log", "linear"), default="log")
    w.add_argument("--trials", type=int, default=0, help="Monte Carlo trials per point (0 = analytic only)")
    w.add_argument("--seed", type=int)
    w.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gen-trace", help="write a synthetic trace")
    g.add_argument("--profile", required=True, help="profile file or builtin name (mixA..mixD)")
    g.add_argument("--out", required=True)
    g.add_argument("--length", type=int)
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_gen_trace)

    e = sub.add_parser("ecc-selftest", help="exhaustive and sampled ECC capability checks")
    e.add_argument("--exhaustive-weight", type=int, default=2)
    e.add_argument("--samples", type=int, default=10000)
    e.add_argument("--k", type=int, nargs="+", default=[481], help="TEC-QED message lengths to test")
    e.set_defaults(func=cmd_ecc_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, TraceError, FileNotFoundError) as exc:
        print(f"rtmsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
