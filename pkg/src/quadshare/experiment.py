"""Closed-loop experiment runner over the runway circuit.

One run = one deterministic fixed-step simulation in one of three modes:

  auto    - authority pinned to the autopilot; the reference point advances
            along the circuit at constant speed
  brain   - authority pinned to the command channel, fed by the scripted
            pilot (or live commands through the service)
  shared  - both paths active; the arbiter blends them by flight status

The brain and autopilot paths both produce a CommandSetpoint each step; the
blended setpoint drives a heading/altitude integrator, the altitude PID sets
thrust, the attitude loop sets torques, the mixer sets rotor speeds, RK4
advances the plant. Every step appends one telemetry row; metrics are
computed from the logged rows (and nothing else), so an offline recompute
from the CSV reproduces them exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .arbitration import (
    AuthorityState,
    FlightStatus,
    Mode,
    StatusWeights,
    arbitrate,
    blend,
    evaluate_status,
)
from .bci import (
    BciCommand,
    ChannelModel,
    CommandChannel,
    CommandLimits,
    CommandSetpoint,
    PilotPolicy,
    command_to_setpoint,
    scripted_pilot,
)
from .config import ExperimentConfig
from .control import (
    AttitudeGains,
    AttitudeSetpoint,
    AttitudeStates,
    GainScales,
    PidGains,
    PidState,
    attitude_loop,
    clamp,
    effective_gains,
    inverse_solution,
    mix,
    pid_step,
    wrap_angle,
)
from .errors import GimbalProximity, SimulationDiverged
from .fuzzy import FuzzyEngine
from .plant import QuadParams, step_vector
from .track import Trajectory, build_runway

TELEMETRY_COLUMNS = (
    "t,x,y,z,roll,pitch,yaw,ref_x,ref_y,ref_z,e_xt,rho,alpha,mode,cmd,"
    "kp_eff,ki_eff,kd_eff,m1,m2,m3,m4,saturated"
)


@dataclass(frozen=True)
class TelemetryRow:
    t: float
    x: float
    y: float
    z: float
    roll: float
    pitch: float
    yaw: float
    ref_x: float
    ref_y: float
    ref_z: float
    e_xt: float
    rho: float
    alpha: float
    mode: str
    cmd: str
    kp_eff: float
    ki_eff: float
    kd_eff: float
    m1: float
    m2: float
    m3: float
    m4: float
    saturated: int

    def to_csv(self) -> str:
        return ",".join(
            (
                repr(self.t),
                repr(self.x),
                repr(self.y),
                repr(self.z),
                repr(self.roll),
                repr(self.pitch),
                repr(self.yaw),
                repr(self.ref_x),
                repr(self.ref_y),
                repr(self.ref_z),
                repr(self.e_xt),
                repr(self.rho),
                repr(self.alpha),
                self.mode,
                self.cmd,
                repr(self.kp_eff),
                repr(self.ki_eff),
                repr(self.kd_eff),
                repr(self.m1),
                repr(self.m2),
                repr(self.m3),
                repr(self.m4),
                str(self.saturated),
            )
        )


@dataclass(frozen=True)
class RunMetrics:
    rms_xt: float
    max_xt: float
    rms_alt: float
    completion: float
    switch_count: int
    mean_alpha: float

    def to_dict(self) -> dict:
        return {
            "rms_xt": self.rms_xt,
            "max_xt": self.max_xt,
            "rms_alt": self.rms_alt,
            "completion": self.completion,
            "switch_count": self.switch_count,
            "mean_alpha": self.mean_alpha,
        }


@dataclass(frozen=True)
class RunResult:
    rows: list[TelemetryRow]
    metrics: RunMetrics
    mode: str
    seed: int


def compute_metrics(
    rows: list[TelemetryRow], track: Trajectory, initial_mode: str = "BRAIN"
) -> RunMetrics:
    """Metrics from telemetry rows alone (so CSV replays agree exactly).

    `initial_mode` is the authority label in force before the first row;
    switches are counted as label changes row to row, including a change
    landing on the very first row.
    """
    n = len(rows)
    if n == 0:
        return RunMetrics(0.0, 0.0, 0.0, 0.0, 0, 0.0)
    xs = [r.e_xt for r in rows]
    alts = [track.altitude - r.z for r in rows]
    rms_xt = math.sqrt(math.fsum(v * v for v in xs) / n)
    max_xt = max(abs(v) for v in xs)
    rms_alt = math.sqrt(math.fsum(v * v for v in alts) / n)
    completion = lap_completion([(r.x, r.y) for r in rows], track)
    mean_alpha = math.fsum(r.alpha for r in rows) / n
    switch_count = 0
    prev = initial_mode
    for r in rows:
        if r.mode != prev:
            switch_count += 1
        prev = r.mode
    return RunMetrics(rms_xt, max_xt, rms_alt, completion, switch_count, mean_alpha)


def lap_completion(points: list[tuple[float, float]], track: Trajectory) -> float:
    """Fraction of one lap covered, from logged positions.

    Arc-length progress is unwrapped incrementally: each step's change is
    taken modulo the circuit length into (-L/2, L/2], so driving backwards
    subtracts and a completed lap sums to L.
    """
    if not points:
        return 0.0
    half = 0.5 * track.total_length
    s_prev = track.nearest(np.array(points[0])).s
    unwrapped = 0.0
    best = 0.0
    for p in points[1:]:
        s = track.nearest(np.array(p)).s
        ds = (s - s_prev - half) % track.total_length - half
        # modulo lands in [-half, half); shift the exact -half case to +half
        if ds == -half:
            ds = half
        unwrapped += ds
        s_prev = s
        best = max(best, unwrapped)
    return min(max(best / track.total_length, 0.0), 1.0)


def write_telemetry(rows: Iterable[TelemetryRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TELEMETRY_COLUMNS + "\n")
        for row in rows:
            fh.write(row.to_csv() + "\n")


def read_telemetry(path: str | Path) -> list[TelemetryRow]:
    """Parse a telemetry CSV back into rows (floats round-trip exactly)."""
    fields = TELEMETRY_COLUMNS.split(",")
    rows: list[TelemetryRow] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != TELEMETRY_COLUMNS:
            raise ValueError(f"unexpected telemetry header: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(fields):
                raise ValueError(f"bad telemetry row: {line!r}")
            rec = dict(zip(fields, parts))
            rows.append(
                TelemetryRow(
                    t=float(rec["t"]),
                    x=float(rec["x"]),
                    y=float(rec["y"]),
                    z=float(rec["z"]),
                    roll=float(rec["roll"]),
                    pitch=float(rec["pitch"]),
                    yaw=float(rec["yaw"]),
                    ref_x=float(rec["ref_x"]),
                    ref_y=float(rec["ref_y"]),
                    ref_z=float(rec["ref_z"]),
                    e_xt=float(rec["e_xt"]),
                    rho=float(rec["rho"]),
                    alpha=float(rec["alpha"]),
                    mode=rec["mode"],
                    cmd=rec["cmd"],
                    kp_eff=float(rec["kp_eff"]),
                    ki_eff=float(rec["ki_eff"]),
                    kd_eff=float(rec["kd_eff"]),
                    m1=float(rec["m1"]),
                    m2=float(rec["m2"]),
                    m3=float(rec["m3"]),
                    m4=float(rec["m4"]),
                    saturated=int(rec["saturated"]),
                )
            )
    return rows


class Simulation:
    """One deterministic closed-loop instance stepped one row at a time.

    Owns the plant state, both control paths, the command channel, and the
    arbiter. `step()` produces the telemetry row for the current state and
    defers plant integration to the start of the next call, so a consumer
    that stops after any row has advanced the plant exactly between the rows
    it observed. With `pilot=False` no scripted intents are emitted and the
    channel is fed externally via `emit()` (live teleoperation).
    """

    def __init__(
        self, config: ExperimentConfig, mode: str, seed: int, pilot: bool = True
    ):
        if mode not in ("brain", "auto", "shared"):
            raise ValueError(f"mode must be brain|auto|shared, got {mode!r}")
        self.config = config
        self.mode = mode
        self.seed = seed
        self.pilot = pilot

        self.track = build_runway(
            config.track.straight_len, config.track.arc_len, config.track.altitude
        )
        self.params = QuadParams(
            mass=config.plant.mass,
            ixx=config.plant.ixx,
            iyy=config.plant.iyy,
            izz=config.plant.izz,
            arm=config.plant.arm,
            kt=config.plant.kt,
            kq=config.plant.kq,
            omega_max=config.plant.omega_max,
            g=config.plant.g,
            drag=config.plant.drag,
        )
        self._pvec = self.params.as_vector()
        self._engine = FuzzyEngine(
            resolution=config.fuzzy.resolution, area_tol=config.fuzzy.area_tol
        )
        kernels.warmup()

        self._gains_x = PidGains(config.outer.x.kp, config.outer.x.ki, config.outer.x.kd)
        self._gains_y = PidGains(config.outer.y.kp, config.outer.y.ki, config.outer.y.kd)
        self._gains_alt = PidGains(
            config.outer.alt.kp, config.outer.alt.ki, config.outer.alt.kd
        )
        self._scales = GainScales(
            ke=config.outer.scales.ke,
            kec=config.outer.scales.kec,
            dkp=config.outer.scales.dkp,
            dki=config.outer.scales.dki,
            dkd=config.outer.scales.dkd,
        )
        self._inner_gains = AttitudeGains(
            roll=PidGains(config.inner.roll.kp, config.inner.roll.ki, config.inner.roll.kd),
            pitch=PidGains(
                config.inner.pitch.kp, config.inner.pitch.ki, config.inner.pitch.kd
            ),
            yaw=PidGains(config.inner.yaw.kp, config.inner.yaw.ki, config.inner.yaw.kd),
        )
        self._limits = CommandLimits(
            tilt=config.commands.tilt,
            yaw_rate=config.commands.yaw_rate,
            climb=config.commands.climb,
        )
        self._policy = PilotPolicy(
            w_xt=config.pilot.w_xt,
            w_alt=config.pilot.w_alt,
            w_hdg=config.pilot.w_hdg,
            horizon=config.pilot.horizon,
            lateral_speed=config.pilot.lateral_speed,
            climb_speed=config.pilot.climb_speed,
            yaw_speed=config.pilot.yaw_speed,
            forward_bonus=config.pilot.forward_bonus,
            deadband_xt=config.pilot.deadband_xt,
            deadband_alt=config.pilot.deadband_alt,
            deadband_hdg=config.pilot.deadband_hdg,
        )
        self._weights = StatusWeights(
            w_xt=config.arbitration.w_xt,
            w_alt=config.arbitration.w_alt,
            w_hdg=config.arbitration.w_hdg,
            w_rate=config.arbitration.w_rate,
        )
        self.channel = CommandChannel(
            ChannelModel(
                accuracy=config.channel.accuracy,
                t_rec=config.channel.t_rec,
                latency=config.channel.latency,
                seed=seed,
            )
        )

        self.dt = config.dt
        self._div = config.bounds.divergence

        # initial state: at the circuit start, on altitude, heading down-track
        start = self.track.reference_at(0.0)
        self._vec = np.zeros(12)
        self._vec[0] = start.position[0]
        self._vec[1] = start.position[1]
        self._vec[2] = self.track.altitude
        self._vec[8] = start.heading

        self._st_x = PidState()
        self._st_y = PidState()
        self._st_alt = PidState()
        self._att_states = AttitudeStates()
        self._alt_sp = self.track.altitude
        self._yaw_sp = start.heading
        self._s_ref = 0.0  # constant-speed schedule position (auto mode)
        self.held_cmd: BciCommand | None = None
        self._status: FlightStatus | None = None
        self.auth = self._initial_auth(mode)

        self.k = 0
        self._pending_motors: np.ndarray | None = None
        self._total = self.track.total_length
        self._half = 0.5 * self._total
        self._s_prev: float | None = None
        self._unwrapped = 0.0
        self.best_prog = 0.0

    @staticmethod
    def _initial_auth(mode: str) -> AuthorityState:
        if mode == "auto":
            return AuthorityState(alpha=0.0, mode=Mode.AUTO)
        return AuthorityState(alpha=1.0, mode=Mode.BRAIN)

    @property
    def t(self) -> float:
        """Simulation time of the current (next-logged) row."""
        return round(self.k * self.dt, 9)

    @property
    def lap_fraction(self) -> float:
        return min(max(self.best_prog / self._total, 0.0), 1.0)

    @property
    def initial_mode(self) -> str:
        return Mode.AUTO.value if self.mode == "auto" else Mode.BRAIN.value

    def emit(self, intent: BciCommand):
        """Feed one live command intent into the channel at current sim time.

        Returns the Emission the channel produced, or None if it was dropped
        by the rate limit.
        """
        return self.channel.emit(intent, self.t)

    def set_mode(self, mode: str) -> None:
        """Switch the control mode mid-flight; authority restarts for it."""
        if mode not in ("brain", "auto", "shared"):
            raise ValueError(f"mode must be brain|auto|shared, got {mode!r}")
        self.mode = mode
        self.auth = self._initial_auth(mode)

    def step(self) -> TelemetryRow:
        """Advance to and return the next telemetry row."""
        if self._pending_motors is not None:
            try:
                self._vec = step_vector(
                    self._vec, self._pending_motors, self._pvec, self.dt
                )
            except GimbalProximity as exc:
                raise SimulationDiverged(
                    f"attitude singularity at t={self.t}: {exc}"
                ) from exc
            self.k += 1
        config = self.config
        vec = self._vec
        dt = self.dt
        t = self.t

        if not np.isfinite(vec).all() or np.abs(vec).max() > self._div:
            raise SimulationDiverged(f"state out of bounds at t={t}")

        near = self.track.nearest(vec[0:2])
        # incremental lap progress, same unwrapping rule as lap_completion()
        if self._s_prev is not None:
            ds = (near.s - self._s_prev - self._half) % self._total - self._half
            if ds == -self._half:
                ds = self._half
            self._unwrapped += ds
            self.best_prog = max(self.best_prog, self._unwrapped)
        self._s_prev = near.s
        self._status = evaluate_status(
            vec[0:3], vec[8], self.track, self._status, dt, self._weights, near=near
        )

        if self.mode == "shared":
            self.auth = arbitrate(
                self._status,
                self.auth,
                t,
                config.arbitration.rho_lo,
                config.arbitration.rho_hi,
                config.arbitration.r_max,
            )

        # --- brain path -----------------------------------------------------
        if self.mode != "auto":
            if self.pilot:
                intent = scripted_pilot(
                    vec[0:3], vec[3:6], vec[8], self.track, self._policy, near=near
                )
                self.channel.emit(intent, t)
            for em in self.channel.poll(t):
                self.held_cmd = em.delivered
        brain_sp = (
            command_to_setpoint(self.held_cmd, self._limits)
            if self.held_cmd is not None
            else CommandSetpoint()
        )

        # --- autopilot path ---------------------------------------------------
        if self.mode == "auto":
            ref = self.track.reference_at(self._s_ref)
            self._s_ref += config.guidance.v_ref * dt
        else:
            ref = self.track.reference_at(near.s + config.guidance.lookahead)

        lim_a = config.outer.accel_limit
        lim_i = config.outer.integral_limit
        eff_x = effective_gains(
            self._gains_x, self._st_x, ref.position[0] - vec[0], dt,
            self._engine, self._scales,
        )
        ax, self._st_x = pid_step(
            eff_x, self._st_x, ref.position[0] - vec[0], dt, lim_i, -lim_a, lim_a
        )
        eff_y = effective_gains(
            self._gains_y, self._st_y, ref.position[1] - vec[1], dt,
            self._engine, self._scales,
        )
        ay, self._st_y = pid_step(
            eff_y, self._st_y, ref.position[1] - vec[1], dt, lim_i, -lim_a, lim_a
        )
        auto_att = inverse_solution(
            np.array([ax, ay, 0.0]),
            vec[8],
            self.params.mass,
            self.params.g,
            tilt_limit=config.inner.tilt_limit,
        )
        auto_sp = CommandSetpoint(
            pitch_offset=-auto_att.pitch,
            roll_offset=auto_att.roll,
            yaw_rate=clamp(
                config.guidance.k_yaw * wrap_angle(ref.heading - vec[8]),
                -config.guidance.yaw_rate_limit,
                config.guidance.yaw_rate_limit,
            ),
            vertical_velocity=clamp(
                config.guidance.k_climb * (ref.altitude - self._alt_sp),
                -config.guidance.climb_limit,
                config.guidance.climb_limit,
            ),
        )

        # --- blend and execute ------------------------------------------------
        sp = blend(brain_sp, auto_sp, self.auth.alpha)
        self._yaw_sp = wrap_angle(self._yaw_sp + sp.yaw_rate * dt)
        self._alt_sp = self._alt_sp + sp.vertical_velocity * dt

        e_alt_ctl = self._alt_sp - vec[2]
        eff_alt = effective_gains(
            self._gains_alt, self._st_alt, e_alt_ctl, dt, self._engine, self._scales
        )
        az, self._st_alt = pid_step(
            eff_alt,
            self._st_alt,
            e_alt_ctl,
            dt,
            lim_i,
            -config.outer.vert_accel_limit,
            config.outer.vert_accel_limit,
        )
        thrust = clamp(
            self.params.mass * (self.params.g + az), 0.0, self.params.max_thrust
        )
        att_sp = AttitudeSetpoint(
            roll=sp.roll_offset, pitch=-sp.pitch_offset, yaw=self._yaw_sp, thrust=thrust
        )
        torques, self._att_states = attitude_loop(
            att_sp,
            vec[6:9],
            self._inner_gains,
            self._att_states,
            dt,
            integral_limit=config.inner.integral_limit,
            torque_limit=config.inner.torque_limit,
        )
        motors = mix(
            thrust, torques, self.params.arm, self.params.kt, self.params.kq,
            self.params.omega_max,
        )

        row = TelemetryRow(
            t=float(t),
            x=float(vec[0]),
            y=float(vec[1]),
            z=float(vec[2]),
            roll=float(vec[6]),
            pitch=float(vec[7]),
            yaw=float(vec[8]),
            ref_x=float(ref.position[0]),
            ref_y=float(ref.position[1]),
            ref_z=float(ref.altitude),
            e_xt=float(self._status.e_xt),
            rho=float(self._status.rho),
            alpha=float(self.auth.alpha),
            mode=self.auth.mode.value,
            cmd=self.held_cmd.value if self.held_cmd is not None else "",
            kp_eff=float(eff_x.kp),
            ki_eff=float(eff_x.ki),
            kd_eff=float(eff_x.kd),
            m1=float(motors.speeds[0]),
            m2=float(motors.speeds[1]),
            m3=float(motors.speeds[2]),
            m4=float(motors.speeds[3]),
            saturated=int(motors.saturated),
        )
        self._pending_motors = motors.speeds
        return row


def run_experiment(config: ExperimentConfig, mode: str, seed: int) -> RunResult:
    """Run one seeded closed-loop experiment; see the module docstring."""
    sim = Simulation(config, mode, seed)
    n_steps = int(round(config.duration / config.dt))
    rows: list[TelemetryRow] = []
    for _ in range(n_steps + 1):
        rows.append(sim.step())
        if sim.best_prog >= sim._total:
            break
    metrics = compute_metrics(rows, sim.track, sim.initial_mode)
    return RunResult(rows=rows, metrics=metrics, mode=mode, seed=seed)
