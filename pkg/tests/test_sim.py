import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtmsim.cache import CacheConfig, CacheMode, CacheScheme, Memory, Outcome
from rtmsim.faults import ErrorRates
from rtmsim.sim import RunStats, Simulator, replay
from rtmsim.trace import TraceRecord

TINY = CacheConfig(capacity_bytes=2 * 2 * 64, ways=2)  # 2 sets x 2 ways, lots of evictions


def payloads():
    narrow = st.builds(lambda b, d: struct.pack("<8Q", *[(b + x) % 2**64 for x in d]),
                       st.integers(0, 2**64 - 1), st.lists(st.integers(-100, 100), min_size=8, max_size=8))
    return st.one_of(st.just(bytes(64)), st.binary(min_size=64, max_size=64), narrow)


records = st.lists(
    st.one_of(
        st.builds(lambda a: TraceRecord("R", a * 64 + 3), st.integers(0, 11)),
        st.builds(lambda a, p: TraceRecord("W", a * 64, p), st.integers(0, 11), payloads()),
    ),
    max_size=120,
)


@settings(max_examples=120, deadline=None)
@given(records, st.sampled_from(list(CacheScheme)), st.sampled_from(list(CacheMode)))
def test_zero_error_reads_return_last_write(recs, scheme, mode):
    cfg = CacheConfig(capacity_bytes=TINY.capacity_bytes, ways=TINY.ways, mode=mode)
    sim = Simulator(cfg, scheme, ErrorRates.zero())
    truth = {}
    for rec in recs:
        ev, data = sim.step(rec)
        if rec.op == "W":
            truth[rec.line_address] = rec.payload
        else:
            assert data == truth.get(rec.line_address, Memory.initial(rec.line_address))
            assert ev.outcome is Outcome.OK
    assert not sim.failures


def test_clock_is_shared_and_latency_separate():
    recs = [TraceRecord("W", 0, bytes(64)), TraceRecord("R", 0), TraceRecord("R", 0x40)]
    events = {}
    for scheme in CacheScheme:
        out = []
        replay(recs, TINY, scheme, sink=out.append)
        events[scheme] = out
    b, p = events[CacheScheme.BASELINE], events[CacheScheme.PROPOSED]
    assert [e.cycle for e in b] == [e.cycle for e in p] == [0, 10, 20]
    assert p[1].latency - b[1].latency == 3
    assert b[2].latency == p[2].latency == 100 + 11 + 11


def test_common_random_numbers_across_schemes():
    # an incompressible line is stored identically under both schemes and sees identical flips
    line = bytes(range(64))
    recs = [TraceRecord("W", 0, line), TraceRecord("R", 0)] * 200
    rates = ErrorRates(write_failure=2e-3, read_disturb=0, retention=0, shift=0)
    outs = {}
    for scheme in CacheScheme:
        out = []
        sim = Simulator(TINY, scheme, rates, seed=3)
        sim.run(recs, sink=out.append)
        outs[scheme] = [(e.cycle, e.outcome) for e in out]
    assert outs[CacheScheme.BASELINE] == outs[CacheScheme.PROPOSED]
    assert any(o is Outcome.CORRECTED for _, o in outs[CacheScheme.BASELINE])


def test_run_stats_and_warmup():
    recs = [TraceRecord("W", 64 * i, bytes(64)) for i in range(10)] + [TraceRecord("R", 0)]
    stats, _ = replay(recs, TINY, CacheScheme.PROPOSED, warmup=5, snapshot_interval=2)
    assert stats.requests == 6 and stats.writes == 5 and stats.reads == 1
    assert stats.snapshots == 3
    assert isinstance(stats, RunStats)


def test_cycle_cap_stops_run():
    recs = [TraceRecord("R", 0)] * 50
    sim = Simulator(TINY, CacheScheme.BASELINE, ErrorRates.zero())
    assert sim.run(recs, cycle_cap=100) is True
    assert sim.index == 10
    assert sim.run([], cycle_cap=10**6) is False


@pytest.mark.parametrize("scheme", list(CacheScheme))
def test_clean_refetch_recovers(scheme):
    # a hammered clean line under heavy write failures: detected errors refetch instead of failing
    rates = ErrorRates(write_failure=5e-3, read_disturb=0, retention=0, shift=0)
    sim = Simulator(TINY, scheme, rates, seed=2)
    out = []
    sim.run([TraceRecord("R", 0), TraceRecord("R", 0x80), TraceRecord("R", 0x100)] * 300, sink=out.append)
    outcomes = {e.outcome for e in out}
    assert Outcome.FAILURE not in outcomes
    assert Outcome.REFETCHED in outcomes
