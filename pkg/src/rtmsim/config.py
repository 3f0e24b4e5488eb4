"""``key = value`` experiment configuration with dotted keys.

Keys may be written fully qualified (``cache.ways = 16``) or under an INI
section header (``[cache]`` then ``ways = 16``). ``#`` and ``;`` start
comments. Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cache import CacheConfig, CacheMode
from .faults import ErrorRates, RtmLayout


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    trials: int = 100
    workers: int = 1
    cycle_cap: int = 10**9
    request_interval: int = 10
    snapshot_interval: int = 1000
    warmup: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("sim.trials must be at least 1")
        if self.workers < 1:
            raise ValueError("sim.workers must be at least 1")
        if self.cycle_cap < 1 or self.request_interval < 1 or self.snapshot_interval < 1:
            raise ValueError("sim.cycle_cap, sim.request_interval and sim.snapshot_interval must be positive")
        if self.warmup < 0:
            raise ValueError("sim.warmup must be nonnegative")


@dataclass(frozen=True)
class Config:
    cache: CacheConfig = field(default_factory=CacheConfig)
    rates: ErrorRates = field(default_factory=ErrorRates)
    layout: RtmLayout = field(default_factory=RtmLayout)
    sim: SimConfig = field(default_factory=SimConfig)


def parse_int(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise ValueError(f"{text!r} is not an integer") from None
        return int(value)


def _parse_mode(text: str) -> CacheMode:
    aliases = {
        "secdedplusstrong": CacheMode.SECDED_PLUS_STRONG,
        "secded_plus_strong": CacheMode.SECDED_PLUS_STRONG,
        "strongonlynosecdedstorage": CacheMode.STRONG_ONLY,
        "strong_only": CacheMode.STRONG_ONLY,
        "strongonly": CacheMode.STRONG_ONLY,
    }
    try:
        return aliases[text.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown cache mode {text!r}") from None


# config key -> (section, attribute, parser)
KEYS = {
    "cache.capacity_bytes": ("cache", "capacity_bytes", parse_int),
    "cache.ways": ("cache", "ways", parse_int),
    "cache.line_bytes": ("cache", "line_bytes", parse_int),
    "cache.mode": ("cache", "mode", _parse_mode),
    "cache.base_hit_cycles": ("cache", "base_hit_cycles", parse_int),
    "cache.miss_penalty_cycles": ("cache", "miss_penalty_cycles", parse_int),
    "cache.secded_codec_cycles": ("cache", "secded_codec_cycles", parse_int),
    "cache.tecqed_codec_cycles": ("cache", "tecqed_codec_cycles", parse_int),
    "cache.compress_cycles": ("cache", "compress_cycles", parse_int),
    "cache.decompress_cycles": ("cache", "decompress_cycles", parse_int),
    "error.write_failure": ("rates", "write_failure", float),
    "error.read_disturb": ("rates", "read_disturb", float),
    "error.retention": ("rates", "retention", float),
    "error.shift": ("rates", "shift", float),
    "error.oos_weight": ("rates", "oos_weight", float),
    "error.sim_weight": ("rates", "sim_weight", float),
    "error.tracks": ("layout", "tracks_per_line", parse_int),
    "sim.seed": ("sim", "seed", parse_int),
    "sim.trials": ("sim", "trials", parse_int),
    "sim.workers": ("sim", "workers", parse_int),
    "sim.cycle_cap": ("sim", "cycle_cap", parse_int),
    "sim.request_interval": ("sim", "request_interval", parse_int),
    "sim.snapshot_interval": ("sim", "snapshot_interval", parse_int),
    "sim.warmup": ("sim", "warmup", parse_int),
}

_SECTIONS = {k.split(".", 1)[0] for k in KEYS}

RATE_KEYS = tuple(k for k in KEYS if k.startswith("error.") and k != "error.tracks")


def read_keyvalues(path) -> dict[str, tuple[str, int]]:
    """Raw ``{dotted_key: (value, lineno)}`` from a key=value file."""
    out = {}
    section = ""
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].split(";", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if section and key.split(".", 1)[0] not in _SECTIONS:
                key = f"{section}.{key}"
            out[key] = (value, lineno)
    return out


def build(values: dict, base: Config | None = None) -> Config:
    """Return ``base`` (default: all defaults) with every dotted key in ``values`` set.

    Values may be strings (parsed per key) or already typed. Cross-field
    checks run once, after all keys are applied.
    """
    config = base or Config()
    parts = {name: {} for name in ("cache", "rates", "layout", "sim")}
    for key, value in values.items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}; valid keys: {', '.join(sorted(KEYS))}")
        section, attr, parse = KEYS[key]
        if isinstance(value, str):
            try:
                value = parse(value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        parts[section][attr] = value
    try:
        return Config(**{name: replace(getattr(config, name), **changes) for name, changes in parts.items()})
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def apply(config: Config, key: str, value) -> Config:
    return build({key: value}, config)


def load_config(path) -> Config:
    raw = read_keyvalues(path)
    for key, (_, lineno) in raw.items():
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}; valid keys: {', '.join(sorted(KEYS))}")
    return build({key: value for key, (value, _) in raw.items()})


def dump_config(config: Config) -> dict:
    out = {}
    for key, (section, attr, _) in KEYS.items():
        v = getattr(getattr(config, section), attr)
        out[key] = v.value if isinstance(v, CacheMode) else v
    return out


__all__ = ["Config", "ConfigError", "KEYS", "RATE_KEYS", "SimConfig", "apply", "build", "dump_config", "load_config", "read_keyvalues"]
