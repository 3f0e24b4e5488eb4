import math

import numpy as np
import pytest

from rtmsim.faults import (
    ErrorRates,
    Injector,
    RtmLayout,
    ShiftKind,
    inject_read,
    inject_retention,
    inject_shift,
    inject_write,
    mask_positions,
    positions_mask,
    retention_probability,
)
from rtmsim.rng import Channel, event_stream


def gen(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


def test_rates_validation():
    with pytest.raises(ValueError):
        ErrorRates(write_failure=1.5)
    with pytest.raises(ValueError):
        ErrorRates(read_disturb=-0.1)
    with pytest.raises(ValueError):
        ErrorRates(oos_weight=0, sim_weight=0)
    assert ErrorRates.zero().all_zero
    assert ErrorRates(oos_weight=0, sim_weight=0, shift=0).shift == 0
    s = ErrorRates(write_failure=0.4).scaled(3)
    assert s.write_failure == 1.0 and s.shift == ErrorRates().shift


def test_layout_validation():
    with pytest.raises(ValueError):
        RtmLayout(tracks_per_line=7)
    with pytest.raises(ValueError):
        RtmLayout(vacancy=2)
    lay = RtmLayout(8)
    assert list(lay.track_cells(3))[:3] == [3, 11, 19]
    assert lay.track_of(11) == 3


def test_mask_roundtrip():
    pos = [0, 5, 511]
    m = positions_mask(pos, 512)
    assert m >> 511 == 1 and m & 1 == 1
    assert mask_positions(m, 512) == pos


def test_zero_rates_never_flip():
    z = ErrorRates.zero()
    for s in range(50):
        assert inject_write(123, 512, z, gen(s)) == (123, 0)
        assert inject_read(123, 512, z, gen(s)) == (123, 0)
        assert inject_retention(123, 512, 10**9, z, gen(s)) == (123, 0)
        assert inject_shift(123, 512, RtmLayout(), z, gen(s)) == (123, 0, None)


def test_certain_flip():
    rates = ErrorRates(write_failure=1.0)
    bits, flips = inject_write(0, 512, rates, gen())
    assert bits == flips == (1 << 512) - 1


def test_returned_mask_is_exact():
    rates = ErrorRates(write_failure=0.05)
    rng = gen(3)
    for _ in range(100):
        before = int(rng.integers(0, 1 << 62))
        after, flips = inject_write(before, 523, rates, rng)
        assert after ^ before == flips


@pytest.mark.parametrize("p", [1e-3, 0.02])
def test_write_failure_rate_within_3_sigma(p):
    rates = ErrorRates(write_failure=p)
    rng = gen(7)
    trials, n = 4000, 512
    total = sum(inject_write(0, n, rates, rng)[1].bit_count() for _ in range(trials))
    mean = trials * n * p
    sd = math.sqrt(trials * n * p * (1 - p))
    assert abs(total - mean) < 3 * sd


def test_flip_positions_uniform():
    rates = ErrorRates(read_disturb=0.01)
    rng = gen(8)
    counts = np.zeros(64)
    for _ in range(20000):
        _, f = inject_read(0, 64, rates, rng)
        for p in mask_positions(f, 64):
            counts[p] += 1
    expected = counts.sum() / 64
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 120  # 63 dof, far above the 99.9th percentile (~103) would be suspicious


def test_retention_probability():
    assert retention_probability(1e-12, 0) == 0.0
    assert retention_probability(1e-12, 1000) == pytest.approx(1e-9, rel=1e-6)
    assert retention_probability(0.5, 2) == pytest.approx(0.75)
    assert retention_probability(1.0, 5) == 1.0
    with pytest.raises(ValueError):
        inject_retention(0, 512, -1, ErrorRates(), gen())


def test_shift_out_of_step_moves_track():
    rates = ErrorRates.zero().__class__(0, 0, 0, 1.0, oos_weight=1.0, sim_weight=0.0)
    layout = RtmLayout(tracks_per_line=8, vacancy=0)
    rng = gen(11)
    bits = int.from_bytes(np.random.default_rng(1).bytes(64), "big")
    for _ in range(200):
        after, flips, kind = inject_shift(bits, 512, layout, rates, rng)
        assert kind is ShiftKind.OUT_OF_STEP
        touched = mask_positions(flips, 512)
        assert len({c % 8 for c in touched}) <= 1
        if not touched:
            continue
        track = touched[0] % 8
        cells = list(layout.track_cells(track))
        old = [(bits >> (511 - c)) & 1 for c in cells]
        new = [(after >> (511 - c)) & 1 for c in cells]
        up = old[1:] + [0]
        down = [0] + old[:-1]
        assert new in (up, down)


def test_shift_stop_in_middle_touches_one_track():
    rates = ErrorRates(0, 0, 0, 1.0, oos_weight=0.0, sim_weight=1.0)
    rng = gen(12)
    weights = []
    for _ in range(300):
        _, flips, kind = inject_shift(0, 523, RtmLayout(), rates, rng)
        assert kind is ShiftKind.STOP_IN_MIDDLE
        pos = mask_positions(flips, 523)
        assert all(p < 512 for p in pos)
        assert len({p % 8 for p in pos}) <= 1
        weights.append(len(pos))
    # each of the 64 cells on the track is a fair coin against a zero stored value
    assert abs(np.mean(weights) - 32) < 3 * math.sqrt(16 / len(weights)) * 3


def test_shift_kind_mix():
    rates = ErrorRates(0, 0, 0, 1.0, oos_weight=3.0, sim_weight=1.0)
    rng = gen(13)
    kinds = [inject_shift(0, 512, RtmLayout(), rates, rng)[2] for _ in range(4000)]
    frac = kinds.count(ShiftKind.OUT_OF_STEP) / len(kinds)
    assert abs(frac - 0.75) < 3 * math.sqrt(0.75 * 0.25 / 4000)


def test_shift_needs_full_line():
    with pytest.raises(ValueError):
        inject_shift(0, 100, RtmLayout(), ErrorRates(shift=1.0), gen())


def test_streams_are_reproducible_and_distinct():
    a = event_stream(5, 0, 0x40, 3, Channel.WRITE).random(4)
    b = event_stream(5, 0, 0x40, 3, Channel.WRITE).random(4)
    assert (a == b).all()
    others = [
        event_stream(6, 0, 0x40, 3, Channel.WRITE),
        event_stream(5, 1, 0x40, 3, Channel.WRITE),
        event_stream(5, 0, 0x80, 3, Channel.WRITE),
        event_stream(5, 0, 0x40, 4, Channel.WRITE),
        event_stream(5, 0, 0x40, 3, Channel.READ_DISTURB),
    ]
    for g in others:
        assert not (g.random(4) == a).any()


def test_injector_is_history_independent():
    rates = ErrorRates(write_failure=0.05)
    one = Injector(rates, seed=9)
    two = Injector(rates, seed=9)
    # the second injector sees an unrelated address first
    two.on_write(0x999, two.next_event(0x999), 0, 512)
    e1, e2 = one.next_event(0x40), two.next_event(0x40)
    assert e1 == e2 == 0
    assert one.on_write(0x40, e1, 0, 523) == two.on_write(0x40, e2, 0, 523)
