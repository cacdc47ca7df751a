"""Shared-control arbiter: flight-status risk score and authority blending.

The risk score rho is a weighted sum of absolute tracking errors. Authority
alpha (1 = brain, 0 = autopilot) ramps linearly between two thresholds and
is a pure function of rho. The discrete mode label has hysteresis: once the
autopilot takes over it keeps the label until rho falls all the way below
the low threshold; label changes are also rate-limited, deferring (never
discarding) a pending change until the minimum spacing has elapsed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bci import CommandSetpoint
from .control import wrap_angle
from .errors import BadThresholds
from .track import NearestPoint, Trajectory


class Mode(enum.Enum):
    BRAIN = "BRAIN"
    AUTO = "AUTO"
    BLEND = "BLEND"


@dataclass(frozen=True)
class StatusWeights:
    w_xt: float = 1.0
    w_alt: float = 1.0
    w_hdg: float = 0.5
    w_rate: float = 0.2

    def __post_init__(self) -> None:
        for name in ("w_xt", "w_alt", "w_hdg", "w_rate"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class FlightStatus:
    e_xt: float = 0.0
    e_alt: float = 0.0
    e_hdg: float = 0.0
    e_rate: float = 0.0  # d/dt of the positional error magnitude, m/s
    rho: float = 0.0


def evaluate_status(
    position: np.ndarray,
    yaw: float,
    track: Trajectory,
    prev: FlightStatus | None,
    dt: float,
    weights: StatusWeights,
    near: NearestPoint | None = None,
) -> FlightStatus:
    """Tracking errors against the nearest circuit point, plus composite rho.

    `near` may carry a precomputed projection of `position` onto the circuit.
    """
    if near is None:
        near = track.nearest(position)
    e_xt = near.cross_track
    e_alt = track.altitude - float(position[2])
    e_hdg = wrap_angle(near.heading - yaw)
    e_pos = math.hypot(e_xt, e_alt)
    if prev is None:
        e_rate = 0.0
    else:
        prev_pos = math.hypot(prev.e_xt, prev.e_alt)
        e_rate = (e_pos - prev_pos) / dt
    rho = (
        weights.w_xt * abs(e_xt)
        + weights.w_alt * abs(e_alt)
        + weights.w_hdg * abs(e_hdg)
        + weights.w_rate * abs(e_rate)
    )
    return FlightStatus(e_xt=e_xt, e_alt=e_alt, e_hdg=e_hdg, e_rate=e_rate, rho=rho)


@dataclass(frozen=True)
class AuthorityState:
    alpha: float = 1.0
    mode: Mode = Mode.BRAIN
    last_switch_t: float = -math.inf
    switch_count: int = 0


def authority_ramp(rho: float, rho_lo: float, rho_hi: float) -> float:
    """alpha as a continuous piecewise-linear function of rho."""
    if rho <= rho_lo:
        return 1.0
    if rho >= rho_hi:
        return 0.0
    return (rho_hi - rho) / (rho_hi - rho_lo)


def arbitrate(
    status: FlightStatus,
    auth: AuthorityState,
    t: float,
    rho_lo: float,
    rho_hi: float,
    r_max: float,
) -> AuthorityState:
    """One arbiter update: new alpha plus the rate-limited mode label."""
    if not (rho_hi > rho_lo >= 0.0):
        raise BadThresholds(f"need rho_hi > rho_lo >= 0, got lo={rho_lo} hi={rho_hi}")
    if r_max <= 0.0:
        raise BadThresholds(f"r_max must be positive, got {r_max}")

    alpha = authority_ramp(status.rho, rho_lo, rho_hi)

    if status.rho >= rho_hi:
        desired = Mode.AUTO
    elif status.rho <= rho_lo:
        desired = Mode.BRAIN
    elif auth.mode is Mode.AUTO:
        desired = Mode.AUTO  # hysteresis: the gap does not release the autopilot
    else:
        desired = Mode.BLEND

    if desired is auth.mode:
        return AuthorityState(alpha, auth.mode, auth.last_switch_t, auth.switch_count)
    if t - auth.last_switch_t < 1.0 / r_max:
        # label change deferred; alpha still tracks rho
        return AuthorityState(alpha, auth.mode, auth.last_switch_t, auth.switch_count)
    return AuthorityState(alpha, desired, t, auth.switch_count + 1)


def blend(brain: CommandSetpoint, auto: CommandSetpoint, alpha: float) -> CommandSetpoint:
    """Field-wise convex combination of the two setpoints."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    b = 1.0 - alpha
    return CommandSetpoint(
        pitch_offset=alpha * brain.pitch_offset + b * auto.pitch_offset,
        roll_offset=alpha * brain.roll_offset + b * auto.roll_offset,
        yaw_rate=alpha * brain.yaw_rate + b * auto.yaw_rate,
        vertical_velocity=alpha * brain.vertical_velocity + b * auto.vertical_velocity,
    )
