"""Six-DOF quadrotor rigid body stepped by fixed-step RK4.

Conventions (chosen once, used everywhere):
  - world frame is ENU with z up; gravity acts along -z
  - attitude is ZYX Euler (yaw about z, then pitch about y, then roll about x);
    positive pitch tips the nose down and accelerates the craft along +x at
    zero yaw
  - body rates p, q, r are about the body x, y, z axes

Euler kinematics are singular at pitch +/-pi/2; anything within 1e-3 rad of
the singularity raises GimbalProximity instead of producing garbage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .control import wrap_angle
from .errors import GimbalProximity, NonPositiveDt

PITCH_SINGULARITY_MARGIN = 1e-3

STATE_FIELDS = ("x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "p", "q", "r")


@dataclass(frozen=True)
class QuadParams:
    """Rigid-body and rotor constants for a small electric quadrotor."""

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

    def __post_init__(self) -> None:
        for name in ("mass", "ixx", "iyy", "izz", "arm", "kt", "kq", "omega_max", "g"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.drag < 0.0:
            raise ValueError("drag must be >= 0")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.mass,
                self.ixx,
                self.iyy,
                self.izz,
                self.arm,
                self.kt,
                self.kq,
                self.omega_max,
                self.g,
                self.drag,
            ]
        )

    @property
    def hover_speed(self) -> float:
        """Rotor speed at which four rotors exactly cancel gravity."""
        return math.sqrt(self.mass * self.g / (4.0 * self.kt))

    @property
    def max_thrust(self) -> float:
        return 4.0 * self.kt * self.omega_max**2


@dataclass(frozen=True)
class QuadState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: np.ndarray = field(default_factory=lambda: np.zeros(3))  # roll, pitch, yaw
    rates: np.ndarray = field(default_factory=lambda: np.zeros(3))  # p, q, r

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity, self.attitude, self.rates])

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "QuadState":
        v = np.asarray(v, dtype=float)
        return cls(v[0:3].copy(), v[3:6].copy(), v[6:9].copy(), v[9:12].copy())

    @classmethod
    def at_rest(cls, x: float = 0.0, y: float = 0.0, z: float = 0.0, yaw: float = 0.0) -> "QuadState":
        s = cls()
        s.position[:] = (x, y, z)
        s.attitude[2] = yaw
        return s

    @property
    def yaw(self) -> float:
        return float(self.attitude[2])


def _check_pitch(pitch: float) -> None:
    if abs(abs(wrap_angle(pitch)) - 0.5 * math.pi) < PITCH_SINGULARITY_MARGIN:
        raise GimbalProximity(f"pitch {pitch:.6f} rad is within 1e-3 of +/-pi/2")


def wrap_state_angles(vec: np.ndarray) -> None:
    """In-place wrap of roll/pitch/yaw to (-pi, pi]."""
    vec[6] = wrap_angle(vec[6])
    vec[7] = wrap_angle(vec[7])
    vec[8] = wrap_angle(vec[8])


def derivative(state: QuadState, motors: np.ndarray, params: QuadParams) -> np.ndarray:
    """Time derivative of the 12-state vector."""
    vec = state.as_vector()
    if not np.isfinite(vec).all():
        raise ValueError("state must be finite")
    _check_pitch(vec[7])
    return kernels.derivative(vec, np.asarray(motors, dtype=float), params.as_vector())


def step_vector(vec: np.ndarray, motors: np.ndarray, pvec: np.ndarray, dt: float) -> np.ndarray:
    """RK4 advance on raw arrays (the hot-loop form); wraps angles, guards pitch."""
    _check_pitch(vec[7])
    out = kernels.rk4_step(vec, motors, pvec, dt)
    _check_pitch(out[7])
    wrap_state_angles(out)
    return out


def step(state: QuadState, motors: np.ndarray, params: QuadParams, dt: float) -> QuadState:
    """RK4 advance by dt with angle re-wrapping."""
    if dt <= 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    vec = state.as_vector()
    out = step_vector(vec, np.asarray(motors, dtype=float), params.as_vector(), dt)
    return QuadState.from_vector(out)


def mechanical_energy(state: QuadState, params: QuadParams) -> float:
    """Translational + rotational kinetic plus gravitational potential energy."""
    v2 = float(state.velocity @ state.velocity)
    p, q, r = state.rates
    rot = params.ixx * p * p + params.iyy * q * q + params.izz * r * r
    return 0.5 * params.mass * v2 + 0.5 * float(rot) + params.mass * params.g * float(
        state.position[2]
    )
