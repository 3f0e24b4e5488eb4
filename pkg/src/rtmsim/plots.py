"""Figures written next to the CSV/JSON reports (Agg backend, no display needed)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def vulnerability_figure(report, path) -> Path:
    """Stacked bars of line classes; the hatched part is what a multi-bit error can destroy."""
    fig, ax = plt.subplots(figsize=(4.5, 3.6))
    names = ["baseline", "proposed"]
    vulnerable = [report.baseline_vulnerable, report.proposed_vulnerable]
    protected = [0.0, report.dirty_compressed]
    clean = [report.clean, report.clean]
    ax.bar(names, vulnerable, color="#c0392b", hatch="//", label="vulnerable dirty")
    ax.bar(names, protected, bottom=vulnerable, color="#2e86c1", label="dirty, strong code")
    ax.bar(names, clean, bottom=[v + p for v, p in zip(vulnerable, protected)], color="#bdc3c7", label="clean")
    for x, v in enumerate(vulnerable):
        ax.text(x, v + 0.01, f"{100 * v:.1f}%", ha="center", va="bottom", fontsize=9)
    ax.set_ylim(0, 1)
    ax.set_ylabel("fraction of valid lines")
    ax.legend(fontsize=8, loc="upper right")
    return _save(fig, path)


def _finite(v) -> float:
    return v if v is not None and math.isfinite(v) and v > 0 else 0.0


def mttf_figure(analytic, mc, path) -> Path:
    """Analytic and Monte Carlo MTTF side by side; infinite or unobserved values are left out."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    schemes = ["baseline", "proposed"]
    xs = range(len(schemes))
    a_vals = [_finite(analytic.baseline_mttf), _finite(analytic.proposed_mttf)]
    ax.bar([x - 0.2 for x in xs], a_vals, width=0.4, label="analytic", color="#7f8c8d")
    plotted = list(a_vals)
    if mc is not None:
        vals, lo, hi = [], [], []
        for s in schemes:
            r = mc.reports.get(s)
            m = _finite(r.mean) if r is not None else 0.0
            vals.append(m)
            lo.append(m - _finite(r.ci_low) if m else 0.0)
            hi.append(_finite(r.ci_high) - m if m else 0.0)
        lo = [max(0.0, min(v, m)) for v, m in zip(lo, vals)]
        ax.bar([x + 0.2 for x in xs], vals, width=0.4, yerr=[lo, hi], capsize=4, label="Monte Carlo", color="#27ae60")
        plotted += vals
    ax.set_xticks(list(xs), schemes)
    if any(plotted):
        ax.set_yscale("log")
    else:
        ax.text(0.5, 0.5, "no failures observed", ha="center", va="center", transform=ax.transAxes)
    ax.set_ylabel("MTTF (cycles)")
    ax.legend(fontsize=8)
    return _save(fig, path)


def sweep_figure(key: str, rows: list[dict], path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    x = [r["value"] for r in rows]
    for col, label, style in (
        ("baseline_mttf", "baseline (analytic)", "o-"),
        ("proposed_mttf", "proposed (analytic)", "s-"),
        ("mc_baseline_mttf", "baseline (MC)", "o--"),
        ("mc_proposed_mttf", "proposed (MC)", "s--"),
    ):
        pts = [(xi, r[col]) for xi, r in zip(x, rows) if r.get(col) and math.isfinite(r[col])]
        if pts:
            ax.plot(*zip(*pts), style, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(key)
    ax.set_ylabel("MTTF (cycles)")
    ax.legend(fontsize=8)
    return _save(fig, path)
