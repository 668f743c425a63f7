"""Camera-to-display pipeline as an explicit per-stage delay ledger.

No codec runs: capture, encode, decode and display are parameterized delays,
and the transmission leg goes through an emulated channel. Each scene event
yields one frame record whose glass-to-glass time is exactly the sum of its
stage waits (virtual clock, no hidden time).

Tick grids (capture and display refresh) are quantized to whole microseconds:
30fps captures every 33,333µs, a 60Hz panel refreshes every 16,667µs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netem import ChannelSpec, EmulatedChannel


def grid_period_us(rate_hz: float) -> int:
    """Whole-microsecond tick period for a refresh/capture rate; 0 for inf."""
    if math.isinf(rate_hz):
        return 0
    if rate_hz <= 0:
        raise ValueError("rate must be positive")
    return round(1e6 / rate_hz)


def next_tick_us(t_us: int, period_us: int) -> int:
    """First grid tick at or after t (grid anchored at 0)."""
    if period_us <= 0:
        return t_us
    return -(-t_us // period_us) * period_us


def prev_tick_us(t_us: int, period_us: int, phase_us: int = 0) -> int:
    """Most recent grid tick at or before t, for a grid anchored at phase."""
    if period_us <= 0:
        return t_us
    return phase_us + (t_us - phase_us) // period_us * period_us


@dataclass(frozen=True)
class VideoPathSpec:
    """Stage delays of the video pipeline, in microseconds.

    fps is the capture cadence, display_hz the monitor refresh rate.
    frame_bytes sets the serialization size used by the network leg.
    """

    fps: float = 30.0
    capture_extra_us: int = 0
    encode_us: int = 0
    frame_bytes: int = 0
    decode_us: int = 0
    display_hz: float = 60.0

    def problems(self, path: str = "") -> list[str]:
        prefix = f"{path}." if path else ""
        out = []
        if self.fps <= 0:
            out.append(f"{prefix}fps: must be > 0")
        if self.display_hz <= 0:
            out.append(f"{prefix}display_hz: must be > 0")
        for name in ("capture_extra_us", "encode_us", "decode_us", "frame_bytes"):
            if getattr(self, name) < 0:
                out.append(f"{prefix}{name}: must be >= 0")
        return out


@dataclass(frozen=True)
class VideoFrameRecord:
    """Per-frame stage timestamps; all non-decreasing along the pipeline."""

    frame_id: int
    event_us: int
    capture_us: int
    encode_done_us: int
    arrive_us: int
    decode_done_us: int
    display_us: int

    @property
    def g2g_us(self) -> int:
        return self.display_us - self.event_us


def pipeline_run(spec: VideoPathSpec, event_times_us, channel: EmulatedChannel,
                 ) -> list[VideoFrameRecord]:
    """Run scene events through the staged pipeline, one frame per event.

    An event is picked up by the next capture tick, accumulates the capture
    and encode delays, crosses the network channel, is decoded, and is shown
    at the next display refresh strictly after the previously shown frame (a
    panel presents one frame per refresh). Frames dropped by a lossy channel
    never display and are omitted from the ledger.
    """
    problems = spec.problems()
    if problems:
        raise ValueError("; ".join(problems))
    cap_period = grid_period_us(spec.fps)
    disp_period = grid_period_us(spec.display_hz)

    stages: dict[int, tuple[int, int, int]] = {}
    for frame_id, event_us in enumerate(event_times_us):
        event_us = int(event_us)
        capture_us = next_tick_us(event_us, cap_period)
        encode_done_us = capture_us + spec.capture_extra_us + spec.encode_us
        channel.send(frame_id, encode_done_us, size_bytes=spec.frame_bytes)
        stages[frame_id] = (event_us, capture_us, encode_done_us)

    records = []
    last_display_us: int | None = None
    # Drain everything; deliveries come back in arrival order, which is the
    # order a real player would present them.
    for arrive_us, frame_id in channel.poll(_end_of_time()):
        event_us, capture_us, encode_done_us = stages[frame_id]
        decode_done_us = arrive_us + spec.decode_us
        display_us = next_tick_us(decode_done_us, disp_period)
        if last_display_us is not None and display_us <= last_display_us:
            display_us = last_display_us + disp_period
        last_display_us = display_us
        records.append(VideoFrameRecord(
            frame_id, event_us, capture_us, encode_done_us,
            arrive_us, decode_done_us, display_us))
    records.sort(key=lambda r: r.frame_id)
    return records


def _end_of_time() -> int:
    return 2**62


def g2g_sample(record: VideoFrameRecord) -> int:
    """Glass-to-glass time of one frame: display minus true scene time."""
    times = (record.event_us, record.capture_us, record.encode_done_us,
             record.arrive_us, record.decode_done_us, record.display_us)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError(f"ledger not monotone for frame {record.frame_id}")
    return record.display_us - record.event_us


def uniform_event_times(n: int, fps: float, rng: np.random.Generator,
                        start_us: int = 0) -> np.ndarray:
    """One scene event per frame period, uniformly placed within it.

    This is what makes simulated G2G vary frame to frame the way a live
    measurement does: the capture wait alone spans a full frame period.
    """
    period = grid_period_us(fps)
    offsets = rng.integers(0, period, size=n)
    return start_us + np.arange(n, dtype=np.int64) * period + offsets


def clock_method_reading(true_g2g_us: int, clock_hz: float, camera_hz: float,
                         phase_clock_us: int = 0, phase_camera_us: int = 0) -> int:
    """Simulated clock-on-monitor measurement of a known true G2G time.

    The scene shows a running clock that only updates every 1/clock_hz; the
    recording camera only samples every 1/camera_hz. The reading differences
    the two most recent quantizations: the camera sample carrying the
    displayed frame minus the clock update visible at the event instant.
    Quantization error is bounded by the coarser of the two periods and
    vanishes as both rates go to infinity.
    """
    p_clock = grid_period_us(clock_hz)
    p_camera = grid_period_us(camera_hz)
    shown_event = prev_tick_us(0, p_clock, phase_clock_us)
    seen_display = prev_tick_us(true_g2g_us, p_camera, phase_camera_us)
    return seen_display - shown_event


def clock_method_error_sweep(true_g2g_us: int, clock_hz: float, camera_hz: float,
                             ) -> tuple[int, int]:
    """(max, min) reading error over every whole-µs phase of both grids.

    The two quantization residues are independent, so the extremes of the
    full phase cross-product separate into per-grid extremes; this is an
    exhaustive sweep without forming the product.
    """
    p_clock = grid_period_us(clock_hz)
    p_camera = grid_period_us(camera_hz)
    phases_clock = np.arange(max(p_clock, 1))
    phases_camera = np.arange(max(p_camera, 1))
    r_clock = np.array([-prev_tick_us(0, p_clock, int(p)) for p in phases_clock])
    r_camera = np.array([true_g2g_us - prev_tick_us(true_g2g_us, p_camera, int(p))
                         for p in phases_camera])
    # reading - true = r_clock - r_camera
    return int(r_clock.max() - r_camera.min()), int(r_clock.min() - r_camera.max())
