"""Live WebSocket bridge: the cockpit drives the emulated testbed in real time.

The bridge is the operator station's network edge. Inbound messages are
TeleopCommand envelopes; each valid command is re-stamped with the bridge
clock at ingress (RTT stays a single-clock measurement) and fed through the
emulated uplink. Outbound messages are delayed Telemetry (annotated with the
vehicle pose for the cockpit's top-down view), per-frame G2G samples, and
rolling summary snapshots at 2Hz. On session end the same CSV/report outputs
as a headless run are written.
"""

from __future__ import annotations

import asyncio
import collections
import json
from dataclasses import replace
from pathlib import Path

from websockets.asyncio.server import serve as ws_serve

from . import messages, metrics, runner
from .clock import WallClock
from .messages import TeleopCommand, WireError
from .netem import EmulatedChannel
from .scenario import Scenario
from .vehicle import VehicleAgent
from .videopath import VideoFrameRecord, grid_period_us, next_tick_us
from .netem import channel_rng

SUMMARY_PERIOD_S = 0.5
ROLLING_RTT = 200
ROLLING_G2G = 120


class LiveSession:
    """One realtime experiment shared by every connected cockpit."""

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.clock = WallClock()
        self.uplink = EmulatedChannel(scenario.uplink, "uplink", self.seed)
        self.downlink = EmulatedChannel(scenario.downlink, "downlink", self.seed)
        self.video_channel = EmulatedChannel(scenario.video_net, "video", self.seed)
        self.agent = VehicleAgent(scenario.vehicle, self.uplink, self.downlink,
                                  clock_offset_us=scenario.clock_offset_us)
        self.collector = metrics.RttCollector()
        self.cmd_rows: list[tuple] = []
        self.tele_rows: list[tuple] = []
        self.frames: list[VideoFrameRecord] = []
        self.telemetry_sent = 0
        self.invalid_inbound = 0
        self.cmd_seq = 0
        self.last_client_seq: int | None = None
        self.clients: set = set()
        self.rolling_rtt = collections.deque(maxlen=ROLLING_RTT)
        self.rolling_g2g = collections.deque(maxlen=ROLLING_G2G)
        self._event_rng = channel_rng(self.seed, "video-events")

    # -- inbound ----------------------------------------------------------

    async def handle_client(self, websocket) -> None:
        self.clients.add(websocket)
        try:
            await websocket.send(self._hello_payload())
            async for raw in websocket:
                self._handle_inbound(raw)
        finally:
            self.clients.discard(websocket)

    def _handle_inbound(self, raw) -> None:
        now = self.clock.now_us
        try:
            msg = messages.decode(raw)
        except WireError:
            self.invalid_inbound += 1
            return
        if not isinstance(msg, TeleopCommand):
            self.invalid_inbound += 1
            return
        if self.last_client_seq is not None and msg.seq <= self.last_client_seq:
            self.invalid_inbound += 1
            return
        self.last_client_seq = msg.seq
        self.cmd_seq += 1
        cmd = replace(msg, seq=self.cmd_seq, ts_us=now)
        sched = self.uplink.send(messages.encode(cmd), now)
        self.cmd_rows.append((cmd.seq, now, cmd.steering, cmd.throttle,
                              cmd.brake, int(sched.dropped)))

    def _hello_payload(self) -> str:
        p = self.scenario.vehicle
        return json.dumps({
            "kind": "hello",
            "name": self.scenario.name,
            "wheelbase_m": p.wheelbase_m,
            "max_steer_rad": p.max_steer_rad,
            "max_speed_mps": p.max_speed_mps,
            "rate_hz": self.scenario.operator.rate_hz,
            "cmd_timeout_us": p.cmd_timeout_us,
        }, separators=(",", ":"))

    # -- outbound ---------------------------------------------------------

    async def _broadcast(self, payload: str | bytes) -> None:
        if isinstance(payload, bytes):
            payload = payload.decode("utf-8")
        for ws in list(self.clients):
            try:
                await ws.send(payload)
            except Exception:
                self.clients.discard(ws)

    async def vehicle_loop(self) -> None:
        period = self.scenario.vehicle.tick_period_us
        k = 0
        while True:
            target = k * period
            await self._sleep_until(target)
            now = self.clock.now_us
            for _telemetry, sched in self.agent.tick(now):
                self.telemetry_sent += 1
            k += 1

    async def delivery_pump(self) -> None:
        """Deliver downlink records at their scheduled times."""
        while True:
            nxt = self.downlink.next_delivery_us()
            now = self.clock.now_us
            if nxt is None:
                await asyncio.sleep(0.002)
                continue
            if nxt > now:
                await asyncio.sleep(min(0.05, (nxt - now) / 1e6))
                continue
            for delivery_us, record in self.downlink.poll(now):
                telemetry = messages.decode(record)
                sample = self.collector.offer(telemetry, delivery_us)
                if sample is not None:
                    self.rolling_rtt.append(sample)
                self.tele_rows.append((telemetry.seq, telemetry.ts_us,
                                       delivery_us, telemetry.speed_mps,
                                       telemetry.steering_pos,
                                       telemetry.echo_seq, telemetry.echo_ts_us))
                await self._broadcast(self._telemetry_payload(telemetry))

    def _telemetry_payload(self, telemetry) -> str:
        obj = json.loads(messages.encode(telemetry))
        pose = self.agent.pose_by_seq.pop(telemetry.seq, None)
        for seq in [s for s in self.agent.pose_by_seq if s < telemetry.seq]:
            del self.agent.pose_by_seq[seq]
        if pose is not None:
            obj["x_m"], obj["y_m"], obj["heading_rad"] = pose
        return json.dumps(obj, separators=(",", ":"))

    async def video_loop(self) -> None:
        spec = self.scenario.video
        cap_period = grid_period_us(spec.fps)
        disp_period = grid_period_us(spec.display_hz)
        last_display: int | None = None
        frame_id = 0
        while True:
            target = (frame_id + 1) * cap_period
            await self._sleep_until(target)
            capture_us = target
            event_us = capture_us - int(self._event_rng.integers(0, cap_period))
            encode_done = capture_us + spec.capture_extra_us + spec.encode_us
            sched = self.video_channel.send(frame_id, encode_done,
                                            size_bytes=spec.frame_bytes)
            if not sched.dropped:
                decode_done = sched.delivery_time_us + spec.decode_us
                display_us = next_tick_us(decode_done, disp_period)
                if last_display is not None and display_us <= last_display:
                    display_us = last_display + disp_period
                last_display = display_us
                record = VideoFrameRecord(frame_id, event_us, capture_us,
                                          encode_done, sched.delivery_time_us,
                                          decode_done, display_us)
                asyncio.get_running_loop().create_task(
                    self._announce_frame(record))
            frame_id += 1

    async def _announce_frame(self, record: VideoFrameRecord) -> None:
        await self._sleep_until(record.display_us)
        self.frames.append(record)
        self.rolling_g2g.append(record.g2g_us)
        await self._broadcast(messages.encode_frame_meta(
            record.frame_id, record.event_us, record.display_us, record.g2g_us))

    async def summary_loop(self) -> None:
        while True:
            await asyncio.sleep(SUMMARY_PERIOD_S)
            await self._broadcast(self.summary_payload())

    def summary_payload(self) -> str:
        rtt = (metrics.summarize(list(self.rolling_rtt)).to_dict()
               if self.rolling_rtt else None)
        g2g = (metrics.summarize(list(self.rolling_g2g)).to_dict()
               if self.rolling_g2g else None)
        return json.dumps({
            "kind": "summary",
            "t_us": self.clock.now_us,
            "rtt": rtt,
            "g2g": g2g,
            "speed_mps": self.agent.state.speed_mps,
            "counters": {
                "commands_received": self.cmd_seq,
                "invalid_inbound": self.invalid_inbound,
                "telemetry_sent": self.telemetry_sent,
                "frames_displayed": len(self.frames),
            },
        }, separators=(",", ":"))

    async def _sleep_until(self, target_us: int) -> None:
        delta = target_us - self.clock.now_us
        if delta > 0:
            await asyncio.sleep(delta / 1e6)

    # -- teardown ---------------------------------------------------------

    def finalize(self, out_dir: str | Path | None = None) -> dict:
        """Write the same outputs as a headless run and return the report."""
        out = Path(out_dir) if out_dir is not None else Path(self.scenario.outputs)
        report = runner._build_report(
            self.scenario, self.seed, self.collector, self.cmd_rows,
            self.tele_rows, self.frames, self.uplink, self.downlink,
            self.video_channel, self.telemetry_sent, self.agent)
        report["counters"]["invalid_inbound"] = self.invalid_inbound
        runner._write_outputs(out, report, self.collector, self.cmd_rows,
                              self.tele_rows, self.frames, self.uplink,
                              self.downlink, self.video_channel)
        return report


async def serve(scenario: Scenario, port: int, duration_s: float | None = None,
                out_dir: str | Path | None = None, seed: int | None = None,
                host: str = "127.0.0.1", started: asyncio.Event | None = None,
                ) -> dict:
    """Serve a live session; returns the final report after duration_s.

    duration_s of None or 0 keeps serving until cancelled; the session is
    still finalized (outputs written) on cancellation.
    """
    session = LiveSession(scenario, seed)
    async with ws_serve(session.handle_client, host, port):
        tasks = [
            asyncio.create_task(session.vehicle_loop()),
            asyncio.create_task(session.delivery_pump()),
            asyncio.create_task(session.video_loop()),
            asyncio.create_task(session.summary_loop()),
        ]
        try:
            if duration_s:
                await asyncio.sleep(duration_s)
            else:
                await asyncio.Event().wait()
        except asyncio.CancelledError:
            pass  # interrupted session: still finalize and write outputs
        finally:
            for task in tasks:
                task.cancel()
            await asyncio.gather(*tasks, return_exceptions=True)
    return session.finalize(out_dir)
