"""Counter-based random streams.

Every injection event draws from its own Philox stream keyed by the global
seed and addressed by (trial, address, per-address event index, channel), so
the flips a line sees do not depend on what other lines did first. Two
caches replaying the same trace with the same seed see the same history.
"""

from __future__ import annotations

import enum

import numpy as np

_U64 = (1 << 64) - 1


class Channel(enum.IntEnum):
    WRITE = 0
    READ_DISTURB = 1
    RETENTION = 2
    SHIFT = 3


def event_stream(seed: int, trial: int, address: int, event_index: int, channel: int) -> np.random.Generator:
    # word 0 is left free: Philox increments it as values are drawn
    counter = [0, ((event_index << 8) | int(channel)) & _U64, address & _U64, trial & _U64]
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 128) - 1), counter=counter))
