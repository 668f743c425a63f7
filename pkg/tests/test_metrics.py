import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teleopsim import kernels, metrics
from teleopsim.messages import Telemetry
from teleopsim.metrics import (RttCollector, distance_at_latency,
                               interarrival_jitter, loss_rate, rtt_from_echo,
                               steering_lag, summarize)
from teleopsim.netem import ChannelSpec, EmulatedChannel


def tele(echo_seq, echo_ts_us, seq=1, ts_us=0):
    return Telemetry(seq=seq, ts_us=ts_us, speed_mps=0.0, steering_pos=0.0,
                     echo_ts_us=echo_ts_us, echo_seq=echo_seq)


# -- rtt ----------------------------------------------------------------------

def test_rtt_simple_subtraction():
    assert rtt_from_echo(tele(3, 100_000), 150_000) == 50_000


def test_rtt_sentinel_yields_none():
    assert rtt_from_echo(tele(0, 0), 150_000) is None


def test_rtt_negative_is_error():
    with pytest.raises(ValueError):
        rtt_from_echo(tele(3, 200_000), 150_000)


def test_rtt_collector_dedupes_first_reception_wins():
    c = RttCollector()
    assert c.offer(tele(1, 1_000, seq=1), 40_000) == 39_000
    assert c.offer(tele(1, 1_000, seq=2), 55_000) is None  # repeat echo
    assert c.offer(tele(2, 30_000, seq=3), 75_000) == 45_000
    assert c.samples_us == [39_000, 45_000]
    assert [r[0] for r in c.rows] == [1, 2]


# -- summarize ----------------------------------------------------------------

def test_summary_hand_arithmetic():
    s = summarize([1_000, 2_000, 3_000])
    assert s.n == 3
    assert s.mean_us == 2_000
    assert s.std_us == 1_000  # (n-1) divisor
    assert (s.min_us, s.max_us) == (1_000, 3_000)


def test_summary_constant_series():
    s = summarize([5_000] * 100)
    assert s.std_us == 0
    assert s.p50_us == s.p95_us == s.p99_us == 5_000


def test_summary_single_sample():
    s = summarize([42.0])
    assert s.n == 1 and s.std_us == 0.0 and s.mean_us == 42.0


def test_summary_rejects_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_summary_matches_streaming_oracle():
    # Independent one-pass (Welford) accumulation as the cross-check.
    rng = np.random.default_rng(77)
    data = rng.normal(47_000, 5_000, size=1_000)
    s = summarize(data)
    count, mean, m2 = 0, 0.0, 0.0
    for x in data:
        count += 1
        delta = x - mean
        mean += delta / count
        m2 += delta * (x - mean)
    assert s.mean_us == pytest.approx(mean, rel=1e-9)
    assert s.std_us == pytest.approx(math.sqrt(m2 / (count - 1)), rel=1e-9)
    ordered = np.sort(data)
    assert s.p50_us == ordered[math.ceil(0.50 * 1000) - 1]
    assert s.p95_us == ordered[math.ceil(0.95 * 1000) - 1]
    assert s.p99_us == ordered[math.ceil(0.99 * 1000) - 1]
    assert s.min_us <= s.p50_us <= s.p95_us <= s.p99_us <= s.max_us


@settings(deadline=None, max_examples=100)
@given(st.lists(st.integers(min_value=0, max_value=10**7), min_size=1,
                max_size=60),
       st.permutations(range(8)), st.integers(min_value=1, max_value=1000))
def test_summary_permutation_invariant_and_scale_equivariant(values, _perm, c):
    base = summarize(values)
    rng = np.random.default_rng(1)
    shuffled = list(values)
    rng.shuffle(shuffled)
    assert summarize(shuffled) == base
    scaled = summarize([v * c for v in values])
    assert scaled.mean_us == pytest.approx(base.mean_us * c, rel=1e-9, abs=1e-9)
    assert scaled.std_us == pytest.approx(base.std_us * c, rel=1e-9, abs=1e-6)
    assert scaled.p95_us == base.p95_us * c


# -- jitter -------------------------------------------------------------------

def test_jitter_constant_transit_is_zero():
    assert interarrival_jitter([40_000] * 50) == 0.0


def test_jitter_single_fold():
    assert interarrival_jitter([0, 16_000]) == 1_000.0


def test_jitter_alternating_matches_recurrence():
    transits = [0, 1_000] * 40  # differences alternate +/-1ms
    j = 0.0
    for d in np.diff(transits):
        j += (abs(d) - j) / 16
    assert interarrival_jitter(transits) == pytest.approx(j, rel=1e-12)
    assert j < 1_000  # converges toward the 1ms amplitude from below


def test_jitter_randomized_matches_recurrence_oracle():
    rng = np.random.default_rng(123)
    for _ in range(20):
        transits = rng.integers(10_000, 90_000, size=200)
        j = 0.0
        prev = transits[0]
        for t in transits[1:]:
            j += (abs(t - prev) - j) / 16
            prev = t
        assert interarrival_jitter(transits) == pytest.approx(j, rel=1e-9)


@settings(deadline=None, max_examples=100)
@given(st.lists(st.integers(min_value=0, max_value=10**6), min_size=2,
                max_size=100),
       st.integers(min_value=-10**6, max_value=10**6))
def test_jitter_offset_invariant(transits, offset):
    shifted = [t + offset for t in transits]
    assert interarrival_jitter(shifted) == pytest.approx(
        interarrival_jitter(transits), rel=1e-12, abs=1e-9)


def test_jitter_needs_two_packets():
    with pytest.raises(ValueError):
        interarrival_jitter([5])


# -- loss ---------------------------------------------------------------------

def test_loss_zero_of_85068():
    assert loss_rate(85_068, 85_068) == 0.0


def test_loss_ten_percent():
    assert loss_rate(100, 90) == pytest.approx(0.10)


def test_loss_rejects_delivered_above_sent():
    with pytest.raises(ValueError):
        loss_rate(10, 11)


def test_loss_matches_emulator_ledger():
    ch = EmulatedChannel(ChannelSpec(base_delay_us=1_000, loss_prob=0.05),
                         "lossy", 21)
    drops = sum(ch.send(i, i).dropped for i in range(10_000))
    assert loss_rate(10_000, 10_000 - drops) == drops / 10_000
    assert drops == ch.dropped


# -- steering lag -------------------------------------------------------------

def lag_series(n=6_000, grid_us=10_000, seed=2):
    rng = np.random.default_rng(seed)
    t = np.arange(n) * grid_us
    t_s = t / 1e6
    u = (0.5 * np.sin(2 * np.pi * 0.2 * t_s)
         + 0.2 * np.sin(2 * np.pi * 0.57 * t_s + 1.0)
         + 0.02 * rng.standard_normal(n))
    return t, u


def test_lag_recovers_pure_shift():
    t, u = lag_series()
    shift = 4  # 40ms on a 10ms grid
    theta = np.concatenate([np.full(shift, u[0]), u[:-shift]])
    est = steering_lag(t, u, t, theta, window_us=500_000)
    assert est.lag_us == 40_000
    assert est.correlation_peak > 0.999


def test_lag_zero_for_identical_series():
    t, u = lag_series()
    est = steering_lag(t, u, t, u, window_us=500_000)
    assert est.lag_us == 0
    assert est.correlation_peak == pytest.approx(1.0, abs=1e-12)


def test_lag_first_order_phase_matches_analytic():
    # theta = first-order response (tau=0.2s) of u delayed by one-way 25ms:
    # expected lag = 25ms + atan(2*pi*f*tau)/(2*pi*f) for a sine at f=0.2Hz.
    grid_us = 10_000
    n = 6_000
    t = np.arange(n) * grid_us
    u = 0.5 * np.sin(2 * np.pi * 0.2 * t / 1e6)
    delayed = 0.5 * np.sin(2 * np.pi * 0.2 * (t - 25_000) / 1e6)
    theta = kernels.first_order_response(delayed, grid_us / 1e6, 0.2,
                                         method="exact")
    est = steering_lag(t, u, t, theta, window_us=1_000_000)
    omega = 2 * math.pi * 0.2
    expected = 25_000 + math.atan(omega * 0.2) / omega * 1e6
    assert abs(est.lag_us - expected) <= grid_us


def test_lag_resamples_mixed_rates():
    t, u = lag_series()
    shift = 6
    theta = np.concatenate([np.full(shift, u[0]), u[:-shift]])
    coarse = slice(None, None, 5)  # 50ms telemetry
    est = steering_lag(t, u, t[coarse], theta[coarse], window_us=500_000)
    assert est.grid_us == 10_000  # finer of the two native rates
    assert abs(est.lag_us - 60_000) <= est.grid_us


def test_lag_rejects_degenerate_and_short_series():
    t, u = lag_series()
    with pytest.raises(ValueError, match="degenerate"):
        steering_lag(t, np.zeros_like(u), t, u, window_us=500_000)
    with pytest.raises(ValueError, match="10s"):
        steering_lag(t[:500], u[:500], t[:500], u[:500], window_us=100_000)
    with pytest.raises(ValueError, match="window"):
        steering_lag(t, u, t, u, window_us=40_000_000)


# -- distance -----------------------------------------------------------------

def test_distance_examples():
    v30 = 30 / 3.6
    assert distance_at_latency(v30, 202_410) == pytest.approx(1.687, abs=5e-4)
    assert distance_at_latency(v30, 23_000) == pytest.approx(0.1917, abs=5e-5)
    assert distance_at_latency(0.0, 1_000_000) == 0.0


@settings(deadline=None, max_examples=100)
@given(st.floats(min_value=0, max_value=100, allow_nan=False),
       st.floats(min_value=0, max_value=10**7, allow_nan=False),
       st.floats(min_value=0, max_value=50, allow_nan=False))
def test_distance_bilinear(v, lat, c):
    assert distance_at_latency(c * v, lat) == pytest.approx(
        c * distance_at_latency(v, lat), rel=1e-12)
    assert distance_at_latency(v, c * lat) == pytest.approx(
        c * distance_at_latency(v, lat), rel=1e-12)
