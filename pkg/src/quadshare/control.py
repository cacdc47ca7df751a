"""Cascade flight controller primitives.

Outer loop: fuzzy-adaptive PID turning position error into desired inertial
acceleration. A small-angle inverse solution converts desired acceleration
plus current heading into roll/pitch setpoints and collective thrust. Inner
loop: conventional per-axis PID on attitude errors producing body torques,
which the mixer allocates to four rotor speeds (X configuration).

All steps are pure: controller memory (integrator, previous error) is passed
in and returned, never hidden.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonPositiveDt
from .fuzzy import FuzzyEngine


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.pi - (math.pi - a) % (2.0 * math.pi)


def clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class PidState:
    """Integrator value and the previous error sample (for backward difference)."""

    integral: float = 0.0
    prev_error: float = 0.0
    primed: bool = False


@dataclass(frozen=True)
class GainScales:
    """Normalization and increment scaling around the fuzzy engine.

    ke/kec map raw error and error-rate onto the engine's input universe;
    dkp/dki/dkd convert crisp outputs on the output universe into actual
    gain increments. All-zero d-scales reduce the adaptive loop to plain PID.
    """

    ke: float = 1.0
    kec: float = 1.0
    dkp: float = 0.0
    dki: float = 0.0
    dkd: float = 0.0


def pid_step(
    gains: PidGains,
    state: PidState,
    error: float,
    dt: float,
    integral_limit: float = math.inf,
    out_lo: float = -math.inf,
    out_hi: float = math.inf,
) -> tuple[float, PidState]:
    """One positional PID update: rectangle-rule integral, backward-difference
    derivative (zero on the first call), clamped integrator and output."""
    if dt <= 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    ec = (error - state.prev_error) / dt if state.primed else 0.0
    integral = clamp(state.integral + error * dt, -integral_limit, integral_limit)
    out = clamp(gains.kp * error + gains.ki * integral + gains.kd * ec, out_lo, out_hi)
    return out, PidState(integral=integral, prev_error=error, primed=True)


def effective_gains(
    base: PidGains,
    state: PidState,
    error: float,
    dt: float,
    engine: FuzzyEngine,
    scales: GainScales,
) -> PidGains:
    """Base gains plus fuzzy increments, floored at zero."""
    if dt <= 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    ec = (error - state.prev_error) / dt if state.primed else 0.0
    dkp, dki, dkd = engine.gain_deltas(scales.ke * error, scales.kec * ec)
    return PidGains(
        kp=max(base.kp + scales.dkp * dkp, 0.0),
        ki=max(base.ki + scales.dki * dki, 0.0),
        kd=max(base.kd + scales.dkd * dkd, 0.0),
    )


def fuzzy_pid_step(
    base: PidGains,
    state: PidState,
    error: float,
    dt: float,
    engine: FuzzyEngine,
    scales: GainScales,
    integral_limit: float = math.inf,
    out_lo: float = -math.inf,
    out_hi: float = math.inf,
) -> tuple[float, PidState, PidGains]:
    """Adaptive PID update: infer gain increments, then run the PID with them."""
    eff = effective_gains(base, state, error, dt, engine, scales)
    out, new_state = pid_step(eff, state, error, dt, integral_limit, out_lo, out_hi)
    return out, new_state, eff


@dataclass(frozen=True)
class AttitudeSetpoint:
    roll: float
    pitch: float
    yaw: float
    thrust: float


def inverse_solution(
    accel_des: np.ndarray,
    yaw: float,
    mass: float,
    g: float,
    tilt_limit: float = math.radians(30.0),
    thrust_max: float = math.inf,
    yaw_setpoint: float | None = None,
) -> AttitudeSetpoint:
    """Map desired inertial acceleration to attitude and thrust (small angle).

    `yaw` is the craft's current heading, used to rotate the horizontal
    acceleration demand into the body-aligned frame; `yaw_setpoint` (default:
    same as `yaw`) is what goes into the returned setpoint.
    """
    ax, ay, az = float(accel_des[0]), float(accel_des[1]), float(accel_des[2])
    c, s = math.cos(yaw), math.sin(yaw)
    pitch = clamp((ax * c + ay * s) / g, -tilt_limit, tilt_limit)
    roll = clamp((ax * s - ay * c) / g, -tilt_limit, tilt_limit)
    thrust = clamp(mass * (g + az), 0.0, thrust_max)
    return AttitudeSetpoint(
        roll=roll,
        pitch=pitch,
        yaw=yaw if yaw_setpoint is None else yaw_setpoint,
        thrust=thrust,
    )


@dataclass(frozen=True)
class AttitudeGains:
    roll: PidGains
    pitch: PidGains
    yaw: PidGains


@dataclass(frozen=True)
class AttitudeStates:
    roll: PidState = PidState()
    pitch: PidState = PidState()
    yaw: PidState = PidState()


def attitude_loop(
    setpoint: AttitudeSetpoint,
    attitude: np.ndarray,
    gains: AttitudeGains,
    states: AttitudeStates,
    dt: float,
    integral_limit: float = math.inf,
    torque_limit: float = math.inf,
) -> tuple[np.ndarray, AttitudeStates]:
    """Three independent PID loops on wrapped angle errors -> body torques."""
    e_roll = wrap_angle(setpoint.roll - float(attitude[0]))
    e_pitch = wrap_angle(setpoint.pitch - float(attitude[1]))
    e_yaw = wrap_angle(setpoint.yaw - float(attitude[2]))
    tx, s_roll = pid_step(
        gains.roll, states.roll, e_roll, dt, integral_limit, -torque_limit, torque_limit
    )
    ty, s_pitch = pid_step(
        gains.pitch, states.pitch, e_pitch, dt, integral_limit, -torque_limit, torque_limit
    )
    tz, s_yaw = pid_step(
        gains.yaw, states.yaw, e_yaw, dt, integral_limit, -torque_limit, torque_limit
    )
    return np.array([tx, ty, tz]), AttitudeStates(s_roll, s_pitch, s_yaw)


class MotorCommands(NamedTuple):
    speeds: np.ndarray  # four rotor speeds, rad/s
    saturated: bool


def mix(
    thrust: float,
    torques: np.ndarray,
    arm: float,
    kt: float,
    kq: float,
    omega_max: float,
) -> MotorCommands:
    """Allocate collective thrust and body torques to four rotor speeds.

    Rotors sit on the diagonals at distance arm/sqrt(2) from each axis
    (X configuration, alternating spin). Per-rotor forces outside what the
    rotors can produce are clamped and flagged.
    """
    d = arm / math.sqrt(2.0)
    x = float(torques[0]) / d
    y = float(torques[1]) / d
    z = float(torques[2]) * kt / kq
    forces = 0.25 * np.array(
        [thrust + x - y + z, thrust + x + y - z, thrust - x + y + z, thrust - x - y - z]
    )
    f_max = kt * omega_max * omega_max
    saturated = bool((forces < 0.0).any() or (forces > f_max).any())
    speeds = np.clip(np.sqrt(np.clip(forces, 0.0, None) / kt), 0.0, omega_max)
    return MotorCommands(speeds=speeds, saturated=saturated)


def unmix(speeds: np.ndarray, arm: float, kt: float, kq: float) -> tuple[float, np.ndarray]:
    """Forward thrust/torque model of four rotor speeds (mix's inverse)."""
    f = kt * np.asarray(speeds) ** 2
    d = arm / math.sqrt(2.0)
    thrust = float(f.sum())
    tau = np.array(
        [
            d * (f[0] + f[1] - f[2] - f[3]),
            d * (-f[0] + f[1] + f[2] - f[3]),
            (kq / kt) * (f[0] - f[1] + f[2] - f[3]),
        ]
    )
    return thrust, tau
