"""Experiment orchestration on the virtual clock, plus report/CSV emission.

The virtual-mode run is strictly single-threaded over a discrete-event heap:
operator command sends, vehicle ticks and downlink arrivals are totally
ordered by (time, event class, insertion order), so the entire output
directory is a pure function of (scenario, seed).
"""

from __future__ import annotations

import csv
import heapq
import itertools
import json
import math
from pathlib import Path

from . import messages, metrics
from .messages import TeleopCommand
from .netem import EmulatedChannel
from .scenario import OperatorScript, Scenario, ScenarioError
from .vehicle import VehicleAgent
from .videopath import grid_period_us, pipeline_run, uniform_event_times
from .netem import channel_rng

# Event ordering at equal timestamps: a command sent at t must be in the
# channel before a tick at t polls it; arrivals are independent of both.
PRI_CMD, PRI_TICK, PRI_RECV = 0, 1, 2

RTT_CSV = "rtt.csv"
G2G_CSV = "g2g.csv"
COMMANDS_CSV = "commands.csv"
TELEMETRY_CSV = "telemetry.csv"
CHANNELS_CSV = "channels.csv"
REPORT_JSON = "report.json"


class OperatorSource:
    """Deterministic command stream for a scripted operator."""

    def __init__(self, script: OperatorScript):
        self.script = script
        self._trace_rows: list[tuple[int, float, float, float]] | None = None
        if script.kind == "trace":
            self._trace_rows = _read_trace(script.trace_path)

    def steering_at(self, t_us: int) -> float:
        s = self.script
        t_s = t_us / 1e6
        if s.kind == "sine":
            value = s.amplitude * math.sin(2 * math.pi * s.freq_hz * (t_s - s.phase_s))
        elif s.kind == "step":
            value = s.amplitude if t_s >= s.step_time_s else 0.0
        else:
            raise RuntimeError("trace scripts provide rows, not a waveform")
        return min(1.0, max(-1.0, value))

    def commands(self, duration_us: int):
        """Yield (t_us, steering, throttle, brake) while t < duration."""
        s = self.script
        if self._trace_rows is not None:
            count = 0
            for t_us, steering, throttle, brake in self._trace_rows:
                t = s.start_offset_us + t_us
                if t >= duration_us or (s.max_commands and count >= s.max_commands):
                    return
                yield t, steering, throttle, brake
                count += 1
            return
        k = 0
        while not (s.max_commands and k >= s.max_commands):
            t = s.start_offset_us + round(k * 1e6 / s.rate_hz)
            if t >= duration_us:
                return
            yield t, self.steering_at(t), s.throttle, s.brake
            k += 1


def _read_trace(path: str) -> list[tuple[int, float, float, float]]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((int(row["t_us"]), float(row["steering"]),
                         float(row["throttle"]), float(row["brake"])))
    rows.sort(key=lambda r: r[0])
    return rows


def run(scenario: Scenario, out_dir: str | Path | None = None,
        seed: int | None = None) -> dict:
    """Execute a virtual-clock scenario and write its output directory.

    Returns the report dict (also written as report.json). Identical
    (scenario, seed) produce byte-identical outputs.
    """
    if scenario.mode != "virtual":
        raise ScenarioError(["mode: run() handles virtual scenarios; use the "
                             "serve command for realtime mode"])
    seed = scenario.seed if seed is None else seed
    out = Path(out_dir) if out_dir is not None else Path(scenario.outputs)

    uplink = EmulatedChannel(scenario.uplink, "uplink", seed)
    downlink = EmulatedChannel(scenario.downlink, "downlink", seed)
    agent = VehicleAgent(scenario.vehicle, uplink, downlink,
                         clock_offset_us=scenario.clock_offset_us)
    operator = OperatorSource(scenario.operator)
    collector = metrics.RttCollector()
    duration_us = scenario.duration_us

    cmd_rows: list[tuple] = []     # seq, send_us, steering, throttle, brake, dropped
    tele_rows: list[tuple] = []    # seq, ts_us, recv_us, speed, steering_pos, echo_seq, echo_ts_us
    telemetry_sent = 0

    heap: list[tuple] = []
    order = itertools.count()

    def push(t_us: int, pri: int, kind: str) -> None:
        heapq.heappush(heap, (t_us, pri, next(order), kind))

    cmd_iter = operator.commands(duration_us)
    pending_cmd = next(cmd_iter, None)
    if pending_cmd is not None:
        push(pending_cmd[0], PRI_CMD, "cmd")
    push(0, PRI_TICK, "tick")
    cmd_seq = 0
    tick_period = scenario.vehicle.tick_period_us

    while heap:
        t, pri, _, kind = heapq.heappop(heap)
        if kind == "cmd":
            _, steering, throttle, brake = pending_cmd
            cmd_seq += 1
            cmd = TeleopCommand(cmd_seq, t, steering, throttle, brake)
            sched = uplink.send(messages.encode(cmd), t)
            cmd_rows.append((cmd_seq, t, steering, throttle, brake,
                             int(sched.dropped)))
            pending_cmd = next(cmd_iter, None)
            if pending_cmd is not None:
                push(pending_cmd[0], PRI_CMD, "cmd")
        elif kind == "tick":
            for _telemetry, sched in agent.tick(t):
                telemetry_sent += 1
                if not sched.dropped:
                    push(sched.delivery_time_us, PRI_RECV, "recv")
            if t + tick_period <= duration_us:
                push(t + tick_period, PRI_TICK, "tick")
        else:  # recv: drain everything due on the downlink
            for delivery_us, record in downlink.poll(t):
                telemetry = messages.decode(record)
                collector.offer(telemetry, delivery_us)
                tele_rows.append((telemetry.seq, telemetry.ts_us, delivery_us,
                                  telemetry.speed_mps, telemetry.steering_pos,
                                  telemetry.echo_seq, telemetry.echo_ts_us))

    # Video pipeline: independent staged-delay leg on the same timeline.
    video_channel = EmulatedChannel(scenario.video_net, "video", seed)
    cap_period = grid_period_us(scenario.video.fps)
    n_frames = max(0, duration_us // cap_period)
    events = uniform_event_times(int(n_frames), scenario.video.fps,
                                 channel_rng(seed, "video-events"))
    frames = pipeline_run(scenario.video, events, video_channel)

    report = _build_report(scenario, seed, collector, cmd_rows, tele_rows,
                           frames, uplink, downlink, video_channel,
                           telemetry_sent, agent)
    _write_outputs(out, report, collector, cmd_rows, tele_rows, frames,
                   uplink, downlink, video_channel)
    return report


def _lag_block(cmd_rows, tele_rows, window_us: int) -> dict | None:
    if len(cmd_rows) < 2 or len(tele_rows) < 2:
        return None
    cmd_t = [r[1] for r in cmd_rows]
    cmd_v = [r[2] for r in cmd_rows]
    pairs = sorted((r[1], r[4]) for r in tele_rows)
    pos_t = [p[0] for p in pairs]
    pos_v = [p[1] for p in pairs]
    try:
        estimate = metrics.steering_lag(cmd_t, cmd_v, pos_t, pos_v, window_us)
    except ValueError:
        return None
    return estimate.to_dict()


def _loss_block(channel: EmulatedChannel) -> dict:
    delivered = channel.sent - channel.dropped
    return {
        "sent": channel.sent,
        "delivered": delivered,
        "dropped": channel.dropped,
        "rate": metrics.loss_rate(channel.sent, delivered) if channel.sent else 0.0,
    }


def _build_report(scenario, seed, collector, cmd_rows, tele_rows, frames,
                  uplink, downlink, video_channel, telemetry_sent, agent) -> dict:
    rtt = None
    if collector.samples_us:
        rtt = metrics.summarize(collector.samples_us).to_dict()
        rtt["csv"] = RTT_CSV
    g2g = None
    if frames:
        g2g = metrics.summarize([f.g2g_us for f in frames]).to_dict()
        g2g["csv"] = G2G_CSV
    jitter = None
    if len(tele_rows) >= 2:
        transit = [r[2] - r[1] for r in tele_rows]
        jitter = {"jitter_us": metrics.interarrival_jitter(transit),
                  "n": len(transit), "csv": TELEMETRY_CSV}
    return {
        "name": scenario.name,
        "seed": seed,
        "mode": scenario.mode,
        "duration_s": scenario.duration_s,
        "lag_window_us": scenario.lag_window_us,
        "rtt": rtt,
        "g2g": g2g,
        "jitter": jitter,
        "loss": {
            "uplink": _loss_block(uplink),
            "downlink": _loss_block(downlink),
            "video": _loss_block(video_channel),
        },
        "steering_lag": _lag_block(cmd_rows, tele_rows, scenario.lag_window_us),
        "counters": {
            "commands_sent": len(cmd_rows),
            "commands_processed": len(agent.processing_log),
            "stale_discarded": agent.stale_discarded,
            "malformed": agent.malformed,
            "telemetry_sent": telemetry_sent,
            "telemetry_received": len(tele_rows),
            "frames_displayed": len(frames),
        },
    }


def _write_outputs(out: Path, report, collector, cmd_rows, tele_rows, frames,
                   uplink, downlink, video_channel) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / COMMANDS_CSV,
               ("seq", "send_us", "steering", "throttle", "brake", "dropped"),
               cmd_rows)
    _write_csv(out / TELEMETRY_CSV,
               ("seq", "ts_us", "recv_us", "speed_mps", "steering_pos",
                "echo_seq", "echo_ts_us"),
               tele_rows)
    _write_csv(out / RTT_CSV, ("seq", "send_us", "recv_us", "rtt_us"),
               collector.rows)
    _write_csv(out / G2G_CSV,
               ("frame_id", "event_us", "capture_us", "encode_done_us",
                "arrive_us", "decode_done_us", "display_us", "g2g_us"),
               [(f.frame_id, f.event_us, f.capture_us, f.encode_done_us,
                 f.arrive_us, f.decode_done_us, f.display_us, f.g2g_us)
                for f in frames])
    _write_csv(out / CHANNELS_CSV, ("channel", "sent", "delivered", "dropped"),
               [(name, ch.sent, ch.sent - ch.dropped, ch.dropped)
                for name, ch in (("uplink", uplink), ("downlink", downlink),
                                 ("video", video_channel))])
    write_report(out, report)


def write_report(out: Path, report: dict) -> None:
    (out / REPORT_JSON).write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summarize_dir(out_dir: str | Path) -> dict:
    """Rebuild report.json from the CSVs in an output directory."""
    out = Path(out_dir)
    previous = {}
    report_path = out / REPORT_JSON
    if report_path.exists():
        previous = json.loads(report_path.read_text())
    window_us = previous.get("lag_window_us", 1_000_000)

    rtt_rows = _read_csv(out / RTT_CSV) if (out / RTT_CSV).exists() else []
    tele_raw = _read_csv(out / TELEMETRY_CSV) if (out / TELEMETRY_CSV).exists() else []
    cmd_raw = _read_csv(out / COMMANDS_CSV) if (out / COMMANDS_CSV).exists() else []
    g2g_raw = _read_csv(out / G2G_CSV) if (out / G2G_CSV).exists() else []
    chan_raw = _read_csv(out / CHANNELS_CSV) if (out / CHANNELS_CSV).exists() else []

    rtt = None
    if rtt_rows:
        rtt = metrics.summarize([int(r["rtt_us"]) for r in rtt_rows]).to_dict()
        rtt["csv"] = RTT_CSV
    g2g = None
    if g2g_raw:
        g2g = metrics.summarize([int(r["g2g_us"]) for r in g2g_raw]).to_dict()
        g2g["csv"] = G2G_CSV
    jitter = None
    if len(tele_raw) >= 2:
        transit = [int(r["recv_us"]) - int(r["ts_us"]) for r in tele_raw]
        jitter = {"jitter_us": metrics.interarrival_jitter(transit),
                  "n": len(transit), "csv": TELEMETRY_CSV}
    cmd_rows = [(int(r["seq"]), int(r["send_us"]), float(r["steering"]),
                 float(r["throttle"]), float(r["brake"]), int(r["dropped"]))
                for r in cmd_raw]
    tele_rows = [(int(r["seq"]), int(r["ts_us"]), int(r["recv_us"]),
                  float(r["speed_mps"]), float(r["steering_pos"]),
                  int(r["echo_seq"]), int(r["echo_ts_us"]))
                 for r in tele_raw]
    loss = {}
    for row in chan_raw:
        sent, delivered = int(row["sent"]), int(row["delivered"])
        loss[row["channel"]] = {
            "sent": sent,
            "delivered": delivered,
            "dropped": int(row["dropped"]),
            "rate": metrics.loss_rate(sent, delivered) if sent else 0.0,
        }

    report = dict(previous)
    report.update({
        "lag_window_us": window_us,
        "rtt": rtt,
        "g2g": g2g,
        "jitter": jitter,
        "loss": loss,
        "steering_lag": _lag_block(cmd_rows, tele_rows, window_us),
    })
    write_report(out, report)
    return report
