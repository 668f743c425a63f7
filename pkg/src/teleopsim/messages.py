"""Command and telemetry wire messages shared by operator, vehicle and bridge.

The wire format is one UTF-8 JSON object per transport record, with a
``kind`` tag and a fixed field order so that encoding is byte-deterministic.
Timestamps are integer microseconds; normalized controls are decimal floats.

Round trips measured from these messages use only the sender's own clock:
a command's ``ts_us`` is echoed back verbatim in telemetry (``echo_ts_us``)
and compared against the sender's receive time, so clock skew between the
two ends never enters an RTT figure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Union

KIND_COMMAND = "command"
KIND_TELEMETRY = "telemetry"
KIND_FRAME_META = "frame-meta"

# "No command processed yet": echo_seq / echo_ts_us of 0. Real command
# sequence numbers start at 1.
ECHO_NONE_SEQ = 0
ECHO_NONE_TS_US = 0


class WireError(ValueError):
    """Malformed, incomplete or invariant-violating wire message."""


@dataclass(frozen=True)
class TeleopCommand:
    """Operator intent: normalized steering/throttle/brake plus send metadata.

    steering is in [-1, 1]; throttle and brake in [0, 1]. seq starts at 1 and
    strictly increases per session; ts_us is the operator-clock send time.
    """

    seq: int
    ts_us: int
    steering: float
    throttle: float
    brake: float

    def check(self) -> None:
        _check_counter("seq", self.seq, minimum=1)
        _check_int("ts_us", self.ts_us)
        _check_range("steering", self.steering, -1.0, 1.0)
        _check_range("throttle", self.throttle, 0.0, 1.0)
        _check_range("brake", self.brake, 0.0, 1.0)


@dataclass(frozen=True)
class Telemetry:
    """Vehicle state report carrying the timestamp echo of the last command.

    echo_ts_us / echo_seq repeat the ts_us / seq of the most recently
    processed command (operator clock), or the 0/0 sentinel before any
    command has been processed.
    """

    seq: int
    ts_us: int
    speed_mps: float
    steering_pos: float
    echo_ts_us: int
    echo_seq: int

    def check(self) -> None:
        _check_counter("seq", self.seq, minimum=1)
        _check_int("ts_us", self.ts_us)
        if not isinstance(self.speed_mps, (int, float)) or self.speed_mps < 0:
            raise WireError(f"speed_mps must be >= 0, got {self.speed_mps!r}")
        _check_range("steering_pos", self.steering_pos, -1.0, 1.0)
        _check_int("echo_ts_us", self.echo_ts_us)
        _check_counter("echo_seq", self.echo_seq, minimum=0)

    @property
    def has_echo(self) -> bool:
        return self.echo_seq != ECHO_NONE_SEQ


Message = Union[TeleopCommand, Telemetry]


def _check_int(name: str, value) -> None:
    # Timestamps live on the sender's own clock; the epoch is arbitrary, so
    # any integer is valid (clock skew can make another end's stamps negative).
    if isinstance(value, bool) or not isinstance(value, int):
        raise WireError(f"{name} must be an integer, got {value!r}")


def _check_counter(name: str, value, minimum: int) -> None:
    _check_int(name, value)
    if value < minimum:
        raise WireError(f"{name} must be >= {minimum}, got {value}")


def _check_range(name: str, value, lo: float, hi: float) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WireError(f"{name} must be a number, got {value!r}")
    if not (lo <= value <= hi):
        raise WireError(f"{name} must be in [{lo}, {hi}], got {value}")


def encode(msg: Message) -> bytes:
    """Serialize a command or telemetry message to canonical JSON bytes.

    Field order is fixed, separators are compact and floats use the shortest
    round-trip repr, so identical messages always encode to identical bytes.
    Raises WireError for messages violating their invariants.
    """
    if isinstance(msg, TeleopCommand):
        msg.check()
        obj = {
            "kind": KIND_COMMAND,
            "seq": msg.seq,
            "ts_us": msg.ts_us,
            "steering": float(msg.steering),
            "throttle": float(msg.throttle),
            "brake": float(msg.brake),
        }
    elif isinstance(msg, Telemetry):
        msg.check()
        obj = {
            "kind": KIND_TELEMETRY,
            "seq": msg.seq,
            "ts_us": msg.ts_us,
            "speed_mps": float(msg.speed_mps),
            "steering_pos": float(msg.steering_pos),
            "echo_ts_us": msg.echo_ts_us,
            "echo_seq": msg.echo_seq,
        }
    else:
        raise WireError(f"cannot encode {type(msg).__name__}")
    return json.dumps(obj, separators=(",", ":")).encode("utf-8")


_COMMAND_FIELDS = ("seq", "ts_us", "steering", "throttle", "brake")
_TELEMETRY_FIELDS = (
    "seq", "ts_us", "speed_mps", "steering_pos", "echo_ts_us", "echo_seq",
)


def decode(data: bytes | str) -> Message:
    """Parse one wire record into a typed message.

    Unknown extra fields are ignored (tolerant reader); missing required
    fields, an unknown kind tag, or out-of-range values raise WireError.
    """
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise WireError(f"malformed wire record: {exc}") from None
    if not isinstance(obj, dict):
        raise WireError(f"wire record must be an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind == KIND_COMMAND:
        fields = _take(obj, _COMMAND_FIELDS)
        msg: Message = TeleopCommand(
            seq=fields["seq"],
            ts_us=fields["ts_us"],
            steering=_as_float(fields["steering"]),
            throttle=_as_float(fields["throttle"]),
            brake=_as_float(fields["brake"]),
        )
    elif kind == KIND_TELEMETRY:
        fields = _take(obj, _TELEMETRY_FIELDS)
        msg = Telemetry(
            seq=fields["seq"],
            ts_us=fields["ts_us"],
            speed_mps=_as_float(fields["speed_mps"]),
            steering_pos=_as_float(fields["steering_pos"]),
            echo_ts_us=fields["echo_ts_us"],
            echo_seq=fields["echo_seq"],
        )
    else:
        raise WireError(f"unknown kind tag {kind!r}")
    msg.check()
    return msg


def _take(obj: dict, names: Iterable[str]) -> dict:
    out = {}
    for name in names:
        if name not in obj:
            raise WireError(f"missing required field {name!r}")
        out[name] = obj[name]
    return out


def _as_float(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WireError(f"expected a number, got {value!r}")
    return float(value)


def encode_frame_meta(frame_id: int, event_us: int, display_us: int, g2g_us: int) -> bytes:
    """Per-frame G2G sample envelope pushed to the cockpit by the live bridge."""
    obj = {
        "kind": KIND_FRAME_META,
        "frame_id": frame_id,
        "event_us": event_us,
        "display_us": display_us,
        "g2g_us": g2g_us,
    }
    return json.dumps(obj, separators=(",", ":")).encode("utf-8")


def seq_violations(messages: Iterable[Message]) -> list[str]:
    """Flag every seq decrease (or repeat) in a decoded session stream."""
    violations = []
    last_seq = None
    for i, msg in enumerate(messages):
        if last_seq is not None and msg.seq <= last_seq:
            violations.append(
                f"record {i}: seq {msg.seq} does not increase past {last_seq}"
            )
        last_seq = msg.seq
    return violations
