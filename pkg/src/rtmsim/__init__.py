"""Reliability simulator for a racetrack-memory last-level cache that pairs
BDI compression with a strong in-line code for dirty lines."""

__version__ = "0.1.0"

from .bdi import CompressedLine, EncodingId, compress, decompress  # noqa: E402
from .cache import Cache, CacheConfig, CacheMode, CacheScheme  # noqa: E402
from .config import Config, load_config  # noqa: E402
from .faults import ErrorRates, RtmLayout  # noqa: E402
from .reliability import (  # noqa: E402
    Exposure,
    VulnerabilityReport,
    analytic_mttf,
    analytic_mttf_ratio,
    latency_proxy,
    monte_carlo_mttf,
    p_uncorrectable,
    vulnerability_report,
)

__all__ = [
    "Cache",
    "CacheConfig",
    "CacheMode",
    "CacheScheme",
    "CompressedLine",
    "Config",
    "EncodingId",
    "ErrorRates",
    "Exposure",
    "RtmLayout",
    "VulnerabilityReport",
    "analytic_mttf",
    "analytic_mttf_ratio",
    "compress",
    "decompress",
    "latency_proxy",
    "load_config",
    "monte_carlo_mttf",
    "p_uncorrectable",
    "vulnerability_report",
]
