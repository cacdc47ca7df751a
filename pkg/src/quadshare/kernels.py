"""Hot numeric kernels: Mamdani inference and 6-DOF rigid-body integration.

Each kernel exists in two flavours selected by `quadshare._backend`:
an @njit loop version and a vectorized pure-numpy version with identical
semantics (floating-point results may differ in the last ulps because
summation order differs). Everything here is purely functional; callers
own all state.

State vector layout (12): x, y, z, vx, vy, vz, roll, pitch, yaw, p, q, r
Plant parameter layout (10): mass, Ixx, Iyy, Izz, arm, kt, kq, omega_max, g, drag
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# Fuzzification: seven triangular sets with saturating shoulders at the ends.
# ---------------------------------------------------------------------------


def _fuzzify_impl(x, centers):
    mu = np.zeros(7)
    if x <= centers[0]:
        mu[0] = 1.0
        return mu
    if x >= centers[6]:
        mu[6] = 1.0
        return mu
    for i in range(6):
        if x <= centers[i + 1]:
            w = centers[i + 1] - centers[i]
            mu[i] = (centers[i + 1] - x) / w
            mu[i + 1] = (x - centers[i]) / w
            return mu
    return mu  # unreachable


def _rule_levels_impl(mu_e, mu_ec, rules):
    lev = np.zeros(7)
    for i in range(7):
        a_i = mu_e[i]
        if a_i == 0.0:
            continue
        for j in range(7):
            a = a_i if a_i < mu_ec[j] else mu_ec[j]
            k = rules[i, j]
            if a > lev[k]:
                lev[k] = a
    return lev


def _infer_loops(e, ec, e_centers, ec_centers, rules, tri, grid, weights, h, area_tol):
    mu_e = _fuzzify_impl(e, e_centers)
    mu_ec = _fuzzify_impl(ec, ec_centers)
    lev = _rule_levels_impl(mu_e, mu_ec, rules)
    num = 0.0
    den = 0.0
    n = grid.shape[0]
    for t in range(n):
        m = 0.0
        for k in range(7):
            v = tri[k, t]
            if lev[k] < v:
                v = lev[k]
            if v > m:
                m = v
        wm = weights[t] * m
        num += wm * grid[t]
        den += wm
    if den * h < area_tol:
        return np.nan
    return num / den


def _infer_numpy(e, ec, e_centers, ec_centers, rules, tri, grid, weights, h, area_tol):
    mu_e = _fuzzify_impl(e, e_centers)
    mu_ec = _fuzzify_impl(ec, ec_centers)
    lev = np.zeros(7)
    act = np.minimum(mu_e[:, None], mu_ec[None, :])
    np.maximum.at(lev, rules.ravel(), act.ravel())
    agg = np.minimum(lev[:, None], tri).max(axis=0)
    wm = weights * agg
    den = wm.sum()
    if den * h < area_tol:
        return np.nan
    return float((wm * grid).sum() / den)


# ---------------------------------------------------------------------------
# Rigid body: thrust/torque model, Newton-Euler derivative, RK4 step.
# The scalar style below runs unchanged under numba and plain Python.
# ---------------------------------------------------------------------------


def _derivative_impl(state, motors, params):
    mass = params[0]
    ixx = params[1]
    iyy = params[2]
    izz = params[3]
    arm = params[4]
    kt = params[5]
    kq = params[6]
    g = params[8]
    drag = params[9]

    f1 = kt * motors[0] * motors[0]
    f2 = kt * motors[1] * motors[1]
    f3 = kt * motors[2] * motors[2]
    f4 = kt * motors[3] * motors[3]
    thrust = f1 + f2 + f3 + f4
    d = arm / math.sqrt(2.0)
    # rotors 1..4 at (+d,+d), (-d,+d), (-d,-d), (+d,-d); alternating spin
    tau_x = d * (f1 + f2 - f3 - f4)
    tau_y = d * (-f1 + f2 + f3 - f4)
    tau_z = (kq / kt) * (f1 - f2 + f3 - f4)

    vx, vy, vz = state[3], state[4], state[5]
    phi, theta, psi = state[6], state[7], state[8]
    p, q, r = state[9], state[10], state[11]

    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    spsi, cpsi = math.sin(psi), math.cos(psi)

    # world-frame thrust direction = third column of Rz(psi)Ry(theta)Rx(phi)
    ax = (cpsi * sth * cphi + spsi * sphi) * thrust / mass - drag * vx / mass
    ay = (spsi * sth * cphi - cpsi * sphi) * thrust / mass - drag * vy / mass
    az = (cth * cphi) * thrust / mass - g - drag * vz / mass

    tth = sth / cth
    dphi = p + sphi * tth * q + cphi * tth * r
    dtheta = cphi * q - sphi * r
    dpsi = (sphi * q + cphi * r) / cth

    dp = (tau_x - (izz - iyy) * q * r) / ixx
    dq = (tau_y - (ixx - izz) * p * r) / iyy
    dr = (tau_z - (iyy - ixx) * p * q) / izz

    ds = np.empty(12)
    ds[0] = vx
    ds[1] = vy
    ds[2] = vz
    ds[3] = ax
    ds[4] = ay
    ds[5] = az
    ds[6] = dphi
    ds[7] = dtheta
    ds[8] = dpsi
    ds[9] = dp
    ds[10] = dq
    ds[11] = dr
    return ds


def _rk4_step_impl(state, motors, params, dt):
    k1 = _derivative_impl(state, motors, params)
    k2 = _derivative_impl(state + 0.5 * dt * k1, motors, params)
    k3 = _derivative_impl(state + 0.5 * dt * k2, motors, params)
    k4 = _derivative_impl(state + dt * k3, motors, params)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


if USE_NUMBA:
    _fuzzify_impl = njit(cache=True)(_fuzzify_impl)
    _rule_levels_impl = njit(cache=True)(_rule_levels_impl)
    _derivative_impl = njit(cache=True)(_derivative_impl)
    infer = njit(cache=True)(_infer_loops)
    derivative = _derivative_impl
    rk4_step = njit(cache=True)(_rk4_step_impl)
else:
    infer = _infer_numpy
    derivative = _derivative_impl
    rk4_step = _rk4_step_impl

fuzzify = _fuzzify_impl


def warmup() -> None:
    """Force JIT compilation of every kernel (no-op on the numpy backend)."""
    centers = np.arange(-3.0, 4.0)
    rules = np.zeros((7, 7), dtype=np.int64)
    grid = np.linspace(-3.0, 3.0, 11)
    tri = np.vstack([fuzzify(x, centers) for x in grid]).T.copy()
    weights = np.ones(11)
    weights[0] = weights[-1] = 0.5
    infer(0.1, -0.2, centers, centers, rules, tri, grid, weights, 0.6, 1e-12)
    state = np.zeros(12)
    motors = np.full(4, 100.0)
    params = np.array([1.2, 0.015, 0.015, 0.025, 0.2, 1.3e-5, 2.6e-7, 800.0, 9.81, 0.25])
    rk4_step(state, motors, params, 0.01)
