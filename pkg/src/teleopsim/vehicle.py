"""Remote-vehicle agent: command loop, steering actuator, surrogate dynamics.

The agent is a single logical actor advanced by a scheduler at a fixed tick
period (100Hz by default). Each tick drains the inbound command channel,
keeps the freshest command by sequence number, applies the failsafe, steps
the first-order steering actuator and the kinematic bicycle model, and emits
telemetry with the timestamp echo at the telemetry cadence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import messages
from .messages import TeleopCommand, Telemetry, WireError
from .netem import EmulatedChannel, ScheduledDelivery


@dataclass(frozen=True)
class VehicleParams:
    """Scenario parameters for the vehicle agent. Times in µs, angles in rad.

    Defaults describe a compact EV surrogate; they are scenario knobs, not
    measured constants. tick_period_us of 10,000 is the 100Hz command loop;
    telemetry_period_us defaults to 20Hz and must be a multiple of the tick.
    """

    wheelbase_m: float = 2.57
    tau_steer_s: float = 0.2
    max_steer_rad: float = 0.6
    max_speed_mps: float = 15.0
    tick_period_us: int = 10_000
    telemetry_period_us: int = 50_000
    actuator_method: str = "exact"
    accel_max_mps2: float = 2.5
    brake_max_mps2: float = 5.0
    drag_per_s: float = 0.05
    cmd_timeout_us: int = 500_000
    brake_ramp_us: int = 1_000_000

    def problems(self, path: str = "") -> list[str]:
        prefix = f"{path}." if path else ""
        out = []
        for name in ("wheelbase_m", "tau_steer_s", "max_steer_rad",
                     "max_speed_mps", "tick_period_us", "telemetry_period_us",
                     "accel_max_mps2", "brake_max_mps2", "cmd_timeout_us",
                     "brake_ramp_us"):
            if getattr(self, name) <= 0:
                out.append(f"{prefix}{name}: must be > 0")
        if self.drag_per_s < 0:
            out.append(f"{prefix}drag_per_s: must be >= 0")
        if self.actuator_method not in ("euler", "exact"):
            out.append(f"{prefix}actuator_method: must be 'euler' or 'exact'")
        if (self.telemetry_period_us > 0 and self.tick_period_us > 0
                and self.telemetry_period_us % self.tick_period_us != 0):
            out.append(f"{prefix}telemetry_period_us: must be a multiple of tick_period_us")
        return out


@dataclass
class VehicleState:
    x_m: float = 0.0
    y_m: float = 0.0
    heading_rad: float = 0.0
    speed_mps: float = 0.0
    steering_norm: float = 0.0
    last_cmd: TeleopCommand | None = None


def actuator_step(theta: float, u: float, dt_s: float, tau_s: float,
                  method: str = "euler") -> float:
    """One step of the first-order steering lag from theta toward command u.

    euler: theta + (dt/tau)(u - theta); exact: theta + (1 - e^(-dt/tau))
    (u - theta). Result clamped to [-1, 1].
    """
    if dt_s <= 0 or tau_s <= 0:
        raise ValueError("dt_s and tau_s must be positive")
    if method == "euler":
        gain = dt_s / tau_s
    elif method == "exact":
        gain = 1.0 - math.exp(-dt_s / tau_s)
    else:
        raise ValueError(f"unknown method {method!r}")
    theta = theta + gain * (u - theta)
    return min(1.0, max(-1.0, theta))


def dynamics_step(state: VehicleState, params: VehicleParams, dt_s: float,
                  throttle: float = 0.0, brake: float = 0.0) -> VehicleState:
    """Advance the kinematic bicycle model by dt using the current state.

    All right-hand sides use the pre-step state (explicit Euler): heading
    rate is v*tan(delta)/wheelbase with delta = steering_norm*max_steer_rad,
    and speed follows v' = v + (a_max*throttle - b_max*brake - drag*v)*dt,
    clamped to [0, max_speed].
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    delta = state.steering_norm * params.max_steer_rad
    v = state.speed_mps
    heading = state.heading_rad
    state.x_m += v * math.cos(heading) * dt_s
    state.y_m += v * math.sin(heading) * dt_s
    state.heading_rad = heading + v * math.tan(delta) / params.wheelbase_m * dt_s
    accel = (params.accel_max_mps2 * throttle - params.brake_max_mps2 * brake
             - params.drag_per_s * v)
    state.speed_mps = min(params.max_speed_mps, max(0.0, v + accel * dt_s))
    return state


@dataclass
class ProcessedCommand:
    """Processing-delay ledger entry: when a command arrived vs. was handled."""

    seq: int
    arrival_us: int
    processed_us: int
    stale: bool

    @property
    def delay_us(self) -> int:
        return self.processed_us - self.arrival_us


@dataclass
class FailsafeCommand:
    steering: float
    throttle: float
    brake: float
    engaged: bool


class VehicleAgent:
    """Single-owner actor: drains the uplink at ticks, emits on the downlink.

    clock_offset_us shifts the vehicle's own ts_us stamps to model operator/
    vehicle clock skew; RTT figures are immune to it by construction because
    they only compare operator-clock stamps.
    """

    def __init__(self, params: VehicleParams, uplink: EmulatedChannel,
                 downlink: EmulatedChannel, clock_offset_us: int = 0):
        problems = params.problems()
        if problems:
            raise ValueError("; ".join(problems))
        self.params = params
        self.uplink = uplink
        self.downlink = downlink
        self.clock_offset_us = clock_offset_us
        self.state = VehicleState()
        self.last_cmd_arrival_us: int | None = None
        self.malformed = 0
        self.stale_discarded = 0
        self.telemetry_seq = 0
        self.processing_log: list[ProcessedCommand] = []
        self._next_telemetry_us = 0
        # Pose snapshots per telemetry seq, for the live bridge's cockpit view.
        self.pose_by_seq: dict[int, tuple[float, float, float]] = {}

    def failsafe(self, now_us: int) -> FailsafeCommand:
        """Effective controls after the command-timeout rule.

        With no command for cmd_timeout_us, throttle drops to zero and brake
        ramps linearly to 1 over brake_ramp_us; steering holds the last
        commanded value. Before any command, the reference time is t=0.
        """
        cmd = self.state.last_cmd
        steering = cmd.steering if cmd else 0.0
        throttle = cmd.throttle if cmd else 0.0
        brake = cmd.brake if cmd else 0.0
        last_seen = self.last_cmd_arrival_us if self.last_cmd_arrival_us is not None else 0
        gap = now_us - last_seen
        if gap <= self.params.cmd_timeout_us:
            return FailsafeCommand(steering, throttle, brake, False)
        ramp = (gap - self.params.cmd_timeout_us) / self.params.brake_ramp_us
        return FailsafeCommand(steering, 0.0, max(brake, min(1.0, ramp)), True)

    def tick(self, now_us: int) -> list[tuple[Telemetry, ScheduledDelivery]]:
        """Advance one command-loop period ending at now_us.

        Returns the telemetry records emitted this tick together with their
        scheduled downlink deliveries (dropped ones included so callers can
        account for loss).
        """
        best: TeleopCommand | None = None
        best_arrival = None
        for delivery_us, record in self.uplink.poll(now_us):
            try:
                msg = messages.decode(record)
            except WireError:
                self.malformed += 1
                continue
            if not isinstance(msg, TeleopCommand):
                self.malformed += 1
                continue
            current = self.state.last_cmd
            stale = ((current is not None and msg.seq <= current.seq)
                     or (best is not None and msg.seq <= best.seq))
            self.processing_log.append(
                ProcessedCommand(msg.seq, delivery_us, now_us, stale))
            if stale:
                self.stale_discarded += 1
                continue
            best = msg
            best_arrival = delivery_us
        if best is not None:
            self.state.last_cmd = best
            self.last_cmd_arrival_us = best_arrival

        controls = self.failsafe(now_us)
        dt_s = self.params.tick_period_us / 1e6
        self.state.steering_norm = actuator_step(
            self.state.steering_norm, controls.steering, dt_s,
            self.params.tau_steer_s, self.params.actuator_method)
        dynamics_step(self.state, self.params, dt_s,
                      controls.throttle, controls.brake)

        emitted = []
        if now_us >= self._next_telemetry_us:
            self._next_telemetry_us += self.params.telemetry_period_us
            emitted.append(self._emit_telemetry(now_us))
        return emitted

    def _emit_telemetry(self, now_us: int) -> tuple[Telemetry, ScheduledDelivery]:
        self.telemetry_seq += 1
        cmd = self.state.last_cmd
        telemetry = Telemetry(
            seq=self.telemetry_seq,
            ts_us=now_us + self.clock_offset_us,
            speed_mps=self.state.speed_mps,
            steering_pos=self.state.steering_norm,
            echo_ts_us=cmd.ts_us if cmd else messages.ECHO_NONE_TS_US,
            echo_seq=cmd.seq if cmd else messages.ECHO_NONE_SEQ,
        )
        self.pose_by_seq[telemetry.seq] = (
            self.state.x_m, self.state.y_m, self.state.heading_rad)
        sched = self.downlink.send(messages.encode(telemetry), now_us)
        return telemetry, sched
