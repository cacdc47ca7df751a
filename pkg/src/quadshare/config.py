"""Experiment configuration: one JSON document, strictly validated.

Unknown keys are rejected (typos in tuning runs should fail loudly, not
silently fall back to defaults), and every constraint violation names the
offending field path.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigInvalid

MODES = ("brain", "auto", "shared")


@dataclass(frozen=True)
class GainConfig:
    kp: float
    ki: float
    kd: float

    def validate(self, path: str) -> None:
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class ScalesConfig:
    ke: float = 0.6
    kec: float = 0.05
    dkp: float = 0.15
    dki: float = 0.01
    dkd: float = 0.1

    def validate(self, path: str) -> None:
        for name in ("ke", "kec", "dkp", "dki", "dkd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class PlantConfig:
    mass: float = 1.2
    ixx: float = 0.015
    iyy: float = 0.015
    izz: float = 0.025
    arm: float = 0.2
    kt: float = 1.3e-5
    kq: float = 2.6e-7
    omega_max: float = 800.0
    g: float = 9.81
    drag: float = 0.25

    def validate(self, path: str) -> None:
        for name in ("mass", "ixx", "iyy", "izz", "arm", "kt", "kq", "omega_max", "g"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")
        if self.drag < 0.0:
            raise ConfigInvalid(f"{path}.drag: must be >= 0")


@dataclass(frozen=True)
class FuzzyConfig:
    resolution: int = 1001
    area_tol: float = 1e-12

    def validate(self, path: str) -> None:
        if self.resolution < 3:
            raise ConfigInvalid(f"{path}.resolution: must be >= 3")
        if self.area_tol <= 0.0:
            raise ConfigInvalid(f"{path}.area_tol: must be positive")


@dataclass(frozen=True)
class OuterLoopConfig:
    x: GainConfig = field(default_factory=lambda: GainConfig(0.8, 0.02, 1.2))
    y: GainConfig = field(default_factory=lambda: GainConfig(0.8, 0.02, 1.2))
    alt: GainConfig = field(default_factory=lambda: GainConfig(2.5, 0.3, 2.0))
    scales: ScalesConfig = field(default_factory=ScalesConfig)
    accel_limit: float = 4.0
    vert_accel_limit: float = 3.0
    integral_limit: float = 2.0

    def validate(self, path: str) -> None:
        self.x.validate(f"{path}.x")
        self.y.validate(f"{path}.y")
        self.alt.validate(f"{path}.alt")
        self.scales.validate(f"{path}.scales")
        for name in ("accel_limit", "vert_accel_limit", "integral_limit"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class InnerLoopConfig:
    roll: GainConfig = field(default_factory=lambda: GainConfig(1.5, 0.2, 0.21))
    pitch: GainConfig = field(default_factory=lambda: GainConfig(1.5, 0.2, 0.21))
    yaw: GainConfig = field(default_factory=lambda: GainConfig(1.0, 0.1, 0.3))
    integral_limit: float = 0.5
    torque_limit: float = 2.0
    tilt_limit: float = 0.35

    def validate(self, path: str) -> None:
        self.roll.validate(f"{path}.roll")
        self.pitch.validate(f"{path}.pitch")
        self.yaw.validate(f"{path}.yaw")
        for name in ("integral_limit", "torque_limit", "tilt_limit"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class ChannelConfig:
    accuracy: float = 0.7
    t_rec: float = 1.0
    latency: float = 0.3

    def validate(self, path: str) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ConfigInvalid(f"{path}.accuracy: must be in [0,1], got {self.accuracy}")
        if self.t_rec <= 0.0:
            raise ConfigInvalid(f"{path}.t_rec: must be positive")
        if self.latency < 0.0:
            raise ConfigInvalid(f"{path}.latency: must be >= 0")


@dataclass(frozen=True)
class CommandConfig:
    tilt: float = 0.12
    yaw_rate: float = 0.5
    climb: float = 1.0

    def validate(self, path: str) -> None:
        for name in ("tilt", "yaw_rate", "climb"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class PilotConfig:
    w_xt: float = 1.0
    w_alt: float = 1.0
    w_hdg: float = 8.0
    horizon: float = 2.0
    lateral_speed: float = 1.2
    climb_speed: float = 1.0
    yaw_speed: float = 0.5
    forward_bonus: float = 0.4
    deadband_xt: float = 1.0
    deadband_alt: float = 0.4
    deadband_hdg: float = 0.1

    def validate(self, path: str) -> None:
        for name in (
            "w_xt", "w_alt", "w_hdg", "forward_bonus",
            "deadband_xt", "deadband_alt", "deadband_hdg",
        ):
            if getattr(self, name) < 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be >= 0")
        for name in ("horizon", "lateral_speed", "climb_speed", "yaw_speed"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class ArbitrationConfig:
    w_xt: float = 1.0
    w_alt: float = 1.0
    w_hdg: float = 0.5
    w_rate: float = 0.2
    rho_lo: float = 1.0
    rho_hi: float = 3.0
    r_max: float = 2.0

    def validate(self, path: str) -> None:
        for name in ("w_xt", "w_alt", "w_hdg", "w_rate"):
            if getattr(self, name) < 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be >= 0")
        if not self.rho_lo >= 0.0:
            raise ConfigInvalid(f"{path}.rho_lo: must be >= 0")
        if not self.rho_hi > self.rho_lo:
            raise ConfigInvalid(f"{path}.rho_hi: must exceed rho_lo")
        if self.r_max <= 0.0:
            raise ConfigInvalid(f"{path}.r_max: must be positive")


@dataclass(frozen=True)
class TrackConfig:
    straight_len: float = 200.0
    arc_len: float = 157.0
    altitude: float = 5.0

    def validate(self, path: str) -> None:
        for name in ("straight_len", "arc_len"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class GuidanceConfig:
    v_ref: float = 5.0
    lookahead: float = 12.0
    k_yaw: float = 1.5
    yaw_rate_limit: float = 1.0
    k_climb: float = 1.0
    climb_limit: float = 2.0

    def validate(self, path: str) -> None:
        for name in ("v_ref", "lookahead", "k_yaw", "yaw_rate_limit", "k_climb", "climb_limit"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class BoundsConfig:
    """Tuned acceptance bounds: fixed after tuning, checked by tests."""

    auto_rms_xt: float = 0.35
    divergence: float = 1e4

    def validate(self, path: str) -> None:
        for name in ("auto_rms_xt", "divergence"):
            if getattr(self, name) <= 0.0:
                raise ConfigInvalid(f"{path}.{name}: must be positive")


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8765
    time_scale: float = 1.0
    decimation: int = 5
    queue_limit: int = 256

    def validate(self, path: str) -> None:
        if not 0 < self.port < 65536:
            raise ConfigInvalid(f"{path}.port: must be in (0, 65536)")
        if self.time_scale <= 0.0:
            raise ConfigInvalid(f"{path}.time_scale: must be positive")
        if self.decimation < 1:
            raise ConfigInvalid(f"{path}.decimation: must be >= 1")
        if self.queue_limit < 1:
            raise ConfigInvalid(f"{path}.queue_limit: must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    dt: float = 0.01
    duration: float = 240.0
    seed: int = 0
    mode: str = "shared"
    plant: PlantConfig = field(default_factory=PlantConfig)
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    outer: OuterLoopConfig = field(default_factory=OuterLoopConfig)
    inner: InnerLoopConfig = field(default_factory=InnerLoopConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    commands: CommandConfig = field(default_factory=CommandConfig)
    pilot: PilotConfig = field(default_factory=PilotConfig)
    arbitration: ArbitrationConfig = field(default_factory=ArbitrationConfig)
    track: TrackConfig = field(default_factory=TrackConfig)
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def validate(self) -> None:
        if self.dt <= 0.0:
            raise ConfigInvalid("dt: must be positive")
        if self.duration <= 0.0:
            raise ConfigInvalid("duration: must be positive")
        if not isinstance(self.seed, int):
            raise ConfigInvalid("seed: must be an integer")
        if self.mode not in MODES:
            raise ConfigInvalid(f"mode: must be one of {MODES}, got {self.mode!r}")
        self.plant.validate("plant")
        self.fuzzy.validate("fuzzy")
        self.outer.validate("outer")
        self.inner.validate("inner")
        self.channel.validate("channel")
        self.commands.validate("commands")
        self.pilot.validate("pilot")
        self.arbitration.validate("arbitration")
        self.track.validate("track")
        self.guidance.validate("guidance")
        self.bounds.validate("bounds")
        self.service.validate("service")


def _build(cls: type, data: Any, path: str) -> Any:
    """Construct a config dataclass from a dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path or 'config'}: expected an object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ConfigInvalid(f"unknown field {path + '.' if path else ''}{key}")
        f = fields[key]
        sub = f.type if isinstance(f.type, type) else None
        if sub is None:
            # dataclass field types are strings under `from __future__ import
            # annotations`; resolve against this module's namespace
            sub = globals().get(str(f.type))
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[key] = _build(sub, value, f"{path + '.' if path else ''}{key}")
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigInvalid(f"{path or 'config'}: {exc}") from exc


def parse_config(data: dict) -> ExperimentConfig:
    cfg = _build(ExperimentConfig, data, "")
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {p} is not valid JSON: {exc}") from exc
    return parse_config(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def default_config() -> ExperimentConfig:
    return ExperimentConfig()
