"""Scenario files: one YAML document describing a complete experiment.

Validation is all-at-once: every problem is reported with its field path
(e.g. ``uplink.loss_prob``) rather than stopping at the first. Unknown keys
are warnings, not errors, so scenario files stay forward compatible.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields, replace
from pathlib import Path

import yaml

from .netem import ChannelSpec
from .vehicle import VehicleParams
from .videopath import VideoPathSpec

MODES = ("virtual", "realtime")
OPERATOR_KINDS = ("step", "sine", "trace")


class ScenarioError(ValueError):
    """Invalid scenario configuration; .errors lists every field problem."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class OperatorScript:
    """Scripted operator: a deterministic command source for headless runs."""

    kind: str = "sine"
    rate_hz: float = 100.0
    amplitude: float = 0.5
    freq_hz: float = 0.2
    phase_s: float = 0.0
    step_time_s: float = 1.0
    throttle: float = 0.0
    brake: float = 0.0
    start_offset_us: int = 0
    max_commands: int = 0  # 0 = unlimited
    trace_path: str | None = None

    def problems(self, path: str = "operator") -> list[str]:
        out = []
        if self.kind not in OPERATOR_KINDS:
            out.append(f"{path}.kind: must be one of {OPERATOR_KINDS}")
        if self.rate_hz <= 0:
            out.append(f"{path}.rate_hz: must be > 0")
        if not (0.0 <= abs(self.amplitude) <= 1.0):
            out.append(f"{path}.amplitude: must be in [-1, 1]")
        if self.freq_hz <= 0:
            out.append(f"{path}.freq_hz: must be > 0")
        if not (0.0 <= self.throttle <= 1.0):
            out.append(f"{path}.throttle: must be in [0, 1]")
        if not (0.0 <= self.brake <= 1.0):
            out.append(f"{path}.brake: must be in [0, 1]")
        if self.start_offset_us < 0:
            out.append(f"{path}.start_offset_us: must be >= 0")
        if self.max_commands < 0:
            out.append(f"{path}.max_commands: must be >= 0 (0 = unlimited)")
        if self.kind == "trace" and not self.trace_path:
            out.append(f"{path}.trace_path: required for kind 'trace'")
        return out


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration_s: float
    mode: str
    vehicle: VehicleParams
    clock_offset_us: int
    uplink: ChannelSpec
    downlink: ChannelSpec
    video: VideoPathSpec
    video_net: ChannelSpec
    operator: OperatorScript
    lag_window_us: int
    outputs: str

    @property
    def duration_us(self) -> int:
        return int(round(self.duration_s * 1e6))


_REQUIRED_SECTIONS = ("uplink", "downlink")
_KNOWN_TOP = {"name", "seed", "duration_s", "mode", "vehicle", "uplink",
              "downlink", "video", "operator", "analysis", "outputs"}


def _build(cls, raw: dict, path: str, errors: list[str], warnings: list[str],
           extra_known: tuple[str, ...] = ()):
    """Instantiate a parameter dataclass from a mapping with type coercion."""
    known = {f.name: f for f in dc_fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key in extra_known:
            continue
        if key not in known:
            warnings.append(f"{path}.{key}: unknown key ignored")
            continue
        target = known[key].default
        if isinstance(value, bool):
            if not isinstance(target, bool):
                errors.append(f"{path}.{key}: expected a number, got a boolean")
                continue
        elif isinstance(target, bool) and not isinstance(value, bool):
            errors.append(f"{path}.{key}: expected a boolean")
            continue
        elif isinstance(target, int) and not isinstance(target, bool):
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            elif not isinstance(value, int):
                errors.append(f"{path}.{key}: expected an integer")
                continue
        elif isinstance(target, float):
            if isinstance(value, int):
                value = float(value)
            elif not isinstance(value, float):
                errors.append(f"{path}.{key}: expected a number")
                continue
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        errors.append(f"{path}: {exc}")
        return cls()


def parse_scenario(doc: dict, base_dir: Path | None = None,
                   ) -> tuple[Scenario, list[str]]:
    """Validate a parsed scenario document; raises ScenarioError on problems.

    Returns the scenario plus a list of warnings (unknown keys and other
    non-fatal observations).
    """
    errors: list[str] = []
    warnings: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioError(["scenario: document must be a mapping"])

    for key in doc:
        if key not in _KNOWN_TOP:
            warnings.append(f"{key}: unknown top-level key ignored")

    name = doc.get("name", "unnamed")
    if not isinstance(name, str) or not name:
        errors.append("name: must be a non-empty string")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        errors.append("seed: must be an integer")
        seed = 0
    duration_s = doc.get("duration_s", 0)
    if isinstance(duration_s, bool) or not isinstance(duration_s, (int, float)):
        errors.append("duration_s: must be a number")
        duration_s = 0.0
    elif duration_s <= 0:
        errors.append("duration_s: must be > 0")
    mode = doc.get("mode", "virtual")
    if mode not in MODES:
        errors.append(f"mode: must be one of {MODES}")

    def section(key: str) -> dict:
        raw = doc.get(key, {})
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            errors.append(f"{key}: must be a mapping")
            return {}
        return raw

    vehicle_raw = section("vehicle")
    vehicle = _build(VehicleParams, vehicle_raw, "vehicle", errors, warnings,
                     extra_known=("clock_offset_us",))
    clock_offset_us = vehicle_raw.get("clock_offset_us", 0)
    if isinstance(clock_offset_us, bool) or not isinstance(clock_offset_us, int):
        errors.append("vehicle.clock_offset_us: expected an integer")
        clock_offset_us = 0
    errors.extend(vehicle.problems("vehicle"))

    for key in _REQUIRED_SECTIONS:
        if key not in doc:
            errors.append(f"{key}: required section missing")
    uplink = _build(ChannelSpec, section("uplink"), "uplink", errors, warnings)
    downlink = _build(ChannelSpec, section("downlink"), "downlink", errors, warnings)
    errors.extend(uplink.problems("uplink"))
    errors.extend(downlink.problems("downlink"))

    video_raw = section("video")
    video_net_raw = video_raw.get("net", {}) or {}
    if not isinstance(video_net_raw, dict):
        errors.append("video.net: must be a mapping")
        video_net_raw = {}
    video = _build(VideoPathSpec, video_raw, "video", errors, warnings,
                   extra_known=("net",))
    video_net = _build(ChannelSpec, video_net_raw, "video.net", errors, warnings)
    errors.extend(video.problems("video"))
    errors.extend(video_net.problems("video.net"))

    operator = _build(OperatorScript, section("operator"), "operator",
                      errors, warnings)
    errors.extend(operator.problems())
    if operator.kind == "trace" and operator.trace_path and base_dir is not None:
        trace = base_dir / operator.trace_path
        if not trace.exists():
            errors.append(f"operator.trace_path: file not found: {trace}")
        else:
            operator = replace(operator, trace_path=str(trace))

    analysis = section("analysis")
    lag_window_us = analysis.get("lag_window_us", 1_000_000)
    if isinstance(lag_window_us, bool) or not isinstance(lag_window_us, int) \
            or lag_window_us <= 0:
        errors.append("analysis.lag_window_us: must be a positive integer")
        lag_window_us = 1_000_000
    for key in analysis:
        if key != "lag_window_us":
            warnings.append(f"analysis.{key}: unknown key ignored")

    outputs = doc.get("outputs", "out")
    if not isinstance(outputs, str) or not outputs:
        errors.append("outputs: must be a non-empty path string")
        outputs = "out"

    if errors:
        raise ScenarioError(errors)
    scenario = Scenario(
        name=name, seed=seed, duration_s=float(duration_s), mode=mode,
        vehicle=vehicle, clock_offset_us=clock_offset_us,
        uplink=uplink, downlink=downlink,
        video=video, video_net=video_net,
        operator=operator, lag_window_us=lag_window_us, outputs=outputs,
    )
    return scenario, warnings


def load_scenario(path: str | Path) -> tuple[Scenario, list[str]]:
    """Read and validate a scenario file (YAML or JSON)."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ScenarioError([f"scenario: cannot read {path}: {exc}"]) from None
    except yaml.YAMLError as exc:
        raise ScenarioError([f"scenario: parse error: {exc}"]) from None
    return parse_scenario(doc, base_dir=path.parent)
