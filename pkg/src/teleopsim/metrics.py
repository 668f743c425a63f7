"""Measurement procedures: timestamp-echo RTT, summaries, jitter, loss, lag.

All latency quantities are integer or float microseconds. Summaries use the
sample (n-1) standard deviation and nearest-rank percentiles so golden files
are bit-exact. The steering-lag estimator resamples both series to a common
uniform grid and finds the peak of the normalized cross-correlation over
non-negative lags (a response cannot precede its command).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .messages import Telemetry


@dataclass(frozen=True)
class MetricSummary:
    """Count/mean/std/min/max/percentiles of one latency series."""

    n: int
    mean_us: float
    std_us: float
    min_us: float
    max_us: float
    p50_us: float
    p95_us: float
    p99_us: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_us": self.mean_us,
            "std_us": self.std_us,
            "min_us": self.min_us,
            "max_us": self.max_us,
            "p50_us": self.p50_us,
            "p95_us": self.p95_us,
            "p99_us": self.p99_us,
        }


def summarize(samples) -> MetricSummary:
    """Exact mean, sample (n-1) std and nearest-rank percentiles."""
    data = np.asarray(samples, dtype=np.float64)
    if data.ndim != 1 or data.size == 0:
        raise ValueError("need at least one sample")
    n = int(data.size)
    # Sorting first makes the float accumulation independent of input order,
    # so equal sample sets give bit-identical summaries.
    ordered = np.sort(data)

    def rank(p: float) -> float:
        idx = max(1, int(np.ceil(p / 100.0 * n))) - 1
        return float(ordered[idx])

    std = float(ordered.std(ddof=1)) if n > 1 else 0.0
    return MetricSummary(
        n=n,
        mean_us=float(ordered.mean()),
        std_us=std,
        min_us=float(ordered[0]),
        max_us=float(ordered[-1]),
        p50_us=rank(50),
        p95_us=rank(95),
        p99_us=rank(99),
    )


def rtt_from_echo(telemetry: Telemetry, recv_time_us: int) -> int | None:
    """Round trip from one telemetry record, on the command sender's clock.

    recv_time_us must come from the same clock that stamped the echoed
    command. Returns None for the no-command-yet sentinel. A negative
    difference means the caller mixed clocks and is an error, not a sample.
    """
    if not telemetry.has_echo:
        return None
    rtt = recv_time_us - telemetry.echo_ts_us
    if rtt < 0:
        raise ValueError(
            f"negative RTT ({rtt}µs): recv_time_us is not on the sender clock")
    return rtt


class RttCollector:
    """Folds a telemetry stream into RTT samples, one per command at most.

    Telemetry repeats the last processed command's echo until a fresh one
    arrives; only the first reception of each echo_seq yields a sample.
    """

    def __init__(self):
        self.samples_us: list[int] = []
        self.rows: list[tuple[int, int, int, int]] = []  # seq, send, recv, rtt
        self._seen: set[int] = set()

    def offer(self, telemetry: Telemetry, recv_time_us: int) -> int | None:
        rtt = rtt_from_echo(telemetry, recv_time_us)
        if rtt is None or telemetry.echo_seq in self._seen:
            return None
        self._seen.add(telemetry.echo_seq)
        self.samples_us.append(rtt)
        self.rows.append((telemetry.echo_seq, telemetry.echo_ts_us,
                          recv_time_us, rtt))
        return rtt


def interarrival_jitter(transit_us) -> float:
    """Smoothed mean deviation of consecutive transit-time differences.

    The iPerf/RTP estimator: starting from J=0, fold J += (|D| - J)/16 over
    each difference D of consecutive per-packet transit times. Only the
    differences matter, so a constant clock offset between the two ends
    cancels out.
    """
    transit = np.asarray(transit_us, dtype=np.float64)
    if transit.ndim != 1 or transit.size < 2:
        raise ValueError("need at least two packets")
    jitter = 0.0
    for d in np.diff(transit):
        jitter += (abs(d) - jitter) / 16.0
    return float(jitter)


def loss_rate(sent: int, delivered: int) -> float:
    """Fraction of records lost: (sent - delivered) / sent."""
    if sent <= 0:
        raise ValueError("sent must be > 0")
    if delivered > sent:
        raise ValueError(f"delivered ({delivered}) exceeds sent ({sent})")
    return (sent - delivered) / sent


@dataclass(frozen=True)
class SteeringLagEstimate:
    lag_us: int
    correlation_peak: float
    window_us: int
    grid_us: int

    def to_dict(self) -> dict:
        return {
            "lag_us": self.lag_us,
            "correlation_peak": self.correlation_peak,
            "window_us": self.window_us,
            "grid_us": self.grid_us,
        }


MIN_LAG_SPAN_US = 10_000_000


def steering_lag(cmd_t_us, cmd_vals, pos_t_us, pos_vals,
                 window_us: int) -> SteeringLagEstimate:
    """Delay between commanded steering and the realized position.

    Both series are linearly resampled to a uniform grid at the finer of the
    two native rates; the estimate is the argmax of the normalized
    cross-correlation over lags in [0, window_us], ties broken toward the
    smaller lag.
    """
    cmd_t = np.asarray(cmd_t_us, dtype=np.float64)
    cmd_v = np.asarray(cmd_vals, dtype=np.float64)
    pos_t = np.asarray(pos_t_us, dtype=np.float64)
    pos_v = np.asarray(pos_vals, dtype=np.float64)
    for t, v, name in ((cmd_t, cmd_v, "command"), (pos_t, pos_v, "position")):
        if t.size != v.size or t.size < 2:
            raise ValueError(f"{name} series needs matching timestamps/values")
        if np.any(np.diff(t) <= 0):
            raise ValueError(f"{name} series timestamps must strictly increase")
        if t[-1] - t[0] < MIN_LAG_SPAN_US:
            raise ValueError(f"{name} series spans less than 10s")
    start = max(cmd_t[0], pos_t[0])
    stop = min(cmd_t[-1], pos_t[-1])
    span = stop - start
    if window_us > span / 2:
        raise ValueError(f"window_us ({window_us}) exceeds half the overlap span")

    grid_us = int(round(min(np.median(np.diff(cmd_t)), np.median(np.diff(pos_t)))))
    grid_us = max(grid_us, 1)
    n = int(span // grid_us) + 1
    grid = start + grid_us * np.arange(n)
    u = np.interp(grid, cmd_t, cmd_v)
    theta = np.interp(grid, pos_t, pos_v)
    if np.ptp(u) == 0.0 or np.ptp(theta) == 0.0:
        raise ValueError("degenerate (constant) series: no lag estimate")

    max_lag = int(window_us // grid_us)
    corr = kernels.ncc_sweep(u, theta, max_lag)
    best = int(np.argmax(corr))  # first occurrence = smaller lag on ties
    return SteeringLagEstimate(
        lag_us=best * grid_us,
        correlation_peak=float(corr[best]),
        window_us=int(window_us),
        grid_us=grid_us,
    )


def distance_at_latency(speed_mps: float, latency_us: float) -> float:
    """Distance in meters covered blind during one latency interval."""
    if speed_mps < 0 or latency_us < 0:
        raise ValueError("speed and latency must be non-negative")
    return speed_mps * latency_us / 1e6
