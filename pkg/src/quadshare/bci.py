"""Simulated brain-computer command channel and the scripted stand-in pilot.

The channel turns an *intent* stream into a *delivered* command stream:
intents arriving closer than the recognition interval are dropped, the rest
are delivered after a fixed latency, correctly with probability `accuracy`
and otherwise as a uniformly random different command. Everything is driven
by one seeded generator, so a (seed, intent stream) pair fully determines
the output.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .control import wrap_angle
from .errors import NonMonotoneTime
from .track import Trajectory


class BciCommand(enum.Enum):
    FORWARD = "FORWARD"
    BACK = "BACK"
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    ASCEND = "ASCEND"
    DESCEND = "DESCEND"
    YAW_LEFT = "YAW_LEFT"
    YAW_RIGHT = "YAW_RIGHT"
    HOVER = "HOVER"


# fixed vocabulary order: used for confusion draws and pilot tie-breaking
VOCABULARY: tuple[BciCommand, ...] = tuple(BciCommand)


@dataclass(frozen=True)
class ChannelModel:
    accuracy: float = 0.7
    t_rec: float = 1.0  # minimum spacing between recognized commands, s
    latency: float = 0.3  # recognition delay, s
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0,1], got {self.accuracy}")
        if self.t_rec <= 0.0:
            raise ValueError(f"t_rec must be positive, got {self.t_rec}")
        if self.latency < 0.0:
            raise ValueError(f"latency must be >= 0, got {self.latency}")


class Emission(NamedTuple):
    intended: BciCommand
    delivered: BciCommand
    t_emit: float
    t_deliver: float

    @property
    def corrupted(self) -> bool:
        return self.delivered is not self.intended


class CommandChannel:
    """Stateful transducer from intents to delayed, corrupted deliveries."""

    def __init__(self, model: ChannelModel):
        self.model = model
        self.rng = np.random.default_rng(model.seed)
        self._t_prev = -math.inf
        self._t_last_emit = -math.inf
        self._pending: deque[Emission] = deque()

    def emit(self, intended: BciCommand, t: float) -> Emission | None:
        """Offer an intent at time t; returns the emission or None if dropped."""
        if t < self._t_prev:
            raise NonMonotoneTime(f"emit at t={t} after t={self._t_prev}")
        self._t_prev = t
        if t - self._t_last_emit < self.model.t_rec:
            return None
        self._t_last_emit = t
        if self.rng.random() < self.model.accuracy:
            delivered = intended
        else:
            others = [c for c in VOCABULARY if c is not intended]
            delivered = others[int(self.rng.integers(len(others)))]
        em = Emission(intended, delivered, t, t + self.model.latency)
        self._pending.append(em)
        return em

    def poll(self, t: float) -> list[Emission]:
        """All emissions whose delivery time has arrived, oldest first."""
        out = []
        while self._pending and self._pending[0].t_deliver <= t:
            out.append(self._pending.popleft())
        return out


@dataclass(frozen=True)
class CommandSetpoint:
    """Attitude-level effect of one command, held until the next.

    pitch/roll offsets use stick convention (positive pitch = nose up); the
    executor flips pitch sign once when forming the plant attitude setpoint.
    """

    pitch_offset: float = 0.0
    roll_offset: float = 0.0
    yaw_rate: float = 0.0
    vertical_velocity: float = 0.0


@dataclass(frozen=True)
class CommandLimits:
    tilt: float = 0.12  # rad
    yaw_rate: float = 0.5  # rad/s
    climb: float = 1.0  # m/s


def command_to_setpoint(cmd: BciCommand, limits: CommandLimits) -> CommandSetpoint:
    """Fixed command-to-setpoint map (zero-order hold applied by the caller)."""
    if cmd is BciCommand.FORWARD:
        return CommandSetpoint(pitch_offset=-limits.tilt)
    if cmd is BciCommand.BACK:
        return CommandSetpoint(pitch_offset=limits.tilt)
    if cmd is BciCommand.LEFT:
        return CommandSetpoint(roll_offset=-limits.tilt)
    if cmd is BciCommand.RIGHT:
        return CommandSetpoint(roll_offset=limits.tilt)
    if cmd is BciCommand.ASCEND:
        return CommandSetpoint(vertical_velocity=limits.climb)
    if cmd is BciCommand.DESCEND:
        return CommandSetpoint(vertical_velocity=-limits.climb)
    if cmd is BciCommand.YAW_LEFT:
        return CommandSetpoint(yaw_rate=limits.yaw_rate)
    if cmd is BciCommand.YAW_RIGHT:
        return CommandSetpoint(yaw_rate=-limits.yaw_rate)
    return CommandSetpoint()  # HOVER


@dataclass(frozen=True)
class PilotPolicy:
    """Greedy one-step lookahead weights for the scripted pilot."""

    w_xt: float = 1.0
    w_alt: float = 1.0
    w_hdg: float = 8.0
    horizon: float = 2.0  # s of imagined effect per command
    lateral_speed: float = 1.2  # m/s produced by LEFT/RIGHT over the horizon
    climb_speed: float = 1.0  # m/s produced by ASCEND/DESCEND
    yaw_speed: float = 0.5  # rad/s produced by YAW_LEFT/YAW_RIGHT
    forward_bonus: float = 0.4
    deadband_xt: float = 1.0  # m of cross-track error tolerated as "on track"
    deadband_alt: float = 0.4  # m of altitude error tolerated
    deadband_hdg: float = 0.1  # rad of heading error tolerated


def _deadband(e: float, width: float) -> float:
    return e if abs(e) > width else 0.0


def _settle(before: float, after: float) -> float:
    """Projected error, zeroed if the sign flips along the way."""
    if before != 0.0 and (before > 0.0) != (after > 0.0):
        return 0.0
    return after


def scripted_pilot(
    position: np.ndarray,
    velocity: np.ndarray,
    yaw: float,
    track: Trajectory,
    policy: PilotPolicy = PilotPolicy(),
    near=None,
) -> BciCommand:
    """Deterministic stand-in for the human: pick the command that most
    reduces the weighted error score over a short imagined horizon; ties go
    to the earlier command in the vocabulary order. `near` may carry a
    precomputed track projection for the current position."""
    if near is None:
        near = track.nearest(position)
    # errors inside their deadband count as already corrected
    e_xt = _deadband(near.cross_track, policy.deadband_xt)
    e_alt = _deadband(track.altitude - float(position[2]), policy.deadband_alt)
    e_hdg = _deadband(wrap_angle(near.heading - yaw), policy.deadband_hdg)
    # current error growth from the vehicle's own motion: cross-track rate is
    # the velocity projected on the local right normal, altitude rate is -vz
    drift = float(velocity[0]) * math.sin(near.heading) - float(
        velocity[1]
    ) * math.cos(near.heading)
    sink = -float(velocity[2])

    tau = policy.horizon
    best_cmd = VOCABULARY[0]
    best_score = math.inf
    for cmd in VOCABULARY:
        d_lat = 0.0
        d_alt = 0.0
        d_yaw = 0.0
        if cmd is BciCommand.LEFT:
            d_lat = -policy.lateral_speed
        elif cmd is BciCommand.RIGHT:
            d_lat = policy.lateral_speed
        elif cmd is BciCommand.ASCEND:
            d_alt = policy.climb_speed
        elif cmd is BciCommand.DESCEND:
            d_alt = -policy.climb_speed
        elif cmd is BciCommand.YAW_LEFT:
            d_yaw = policy.yaw_speed
        elif cmd is BciCommand.YAW_RIGHT:
            d_yaw = -policy.yaw_speed

        # an error whose sign would flip within the horizon counts as
        # nulled: the pilot releases the command at the zero crossing
        # rather than holding it long enough to overshoot
        e_xt_after = _settle(e_xt, e_xt + tau * (drift + d_lat))
        e_alt_after = _settle(e_alt, e_alt + tau * (sink - d_alt))
        e_hdg_after = _settle(e_hdg, e_hdg - tau * d_yaw)
        score = (
            policy.w_xt * abs(e_xt_after)
            + policy.w_alt * abs(e_alt_after)
            + policy.w_hdg * abs(e_hdg_after)
        )
        if cmd is BciCommand.FORWARD:
            score -= policy.forward_bonus
        if score < best_score:
            best_score = score
            best_cmd = cmd
    return best_cmd
