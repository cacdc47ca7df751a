from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadshare.arbitration import (
    AuthorityState,
    FlightStatus,
    Mode,
    StatusWeights,
    arbitrate,
    authority_ramp,
    blend,
    evaluate_status,
)
from quadshare.bci import CommandSetpoint
from quadshare.errors import BadThresholds
from quadshare.track import build_runway

TRACK = build_runway()
LO, HI, RMAX = 1.0, 3.0, 2.0  # min switch spacing 0.5 s


def status(rho: float) -> FlightStatus:
    return FlightStatus(rho=rho)


# --- evaluate_status ---------------------------------------------------------


def test_status_zero_on_track():
    p = TRACK.reference_at(80.0)
    pos = np.array([p.position[0], p.position[1], TRACK.altitude])
    st0 = evaluate_status(pos, p.heading, TRACK, None, 0.01, StatusWeights())
    assert st0.rho == pytest.approx(0.0, abs=1e-9)
    assert st0.e_xt == pytest.approx(0.0, abs=1e-9)
    assert st0.e_alt == pytest.approx(0.0, abs=1e-9)
    assert st0.e_hdg == pytest.approx(0.0, abs=1e-9)


def test_status_cross_track_only():
    # 2 m right of the outbound straight, all other weights zeroed
    pos = np.array([100.0, -2.0, TRACK.altitude])
    w = StatusWeights(w_xt=1.0, w_alt=0.0, w_hdg=0.0, w_rate=0.0)
    st0 = evaluate_status(pos, 0.0, TRACK, None, 0.01, w)
    assert st0.rho == pytest.approx(2.0)
    assert st0.e_xt == pytest.approx(2.0)


def test_status_error_rate():
    w = StatusWeights()
    pos1 = np.array([100.0, -2.0, TRACK.altitude])
    st1 = evaluate_status(pos1, 0.0, TRACK, None, 0.01, w)
    assert st1.e_rate == 0.0  # no history on the first evaluation
    pos2 = np.array([100.0, -2.5, TRACK.altitude])
    st2 = evaluate_status(pos2, 0.0, TRACK, st1, 0.01, w)
    assert st2.e_rate == pytest.approx((2.5 - 2.0) / 0.01)


def test_status_weights_validation():
    with pytest.raises(ValueError):
        StatusWeights(w_xt=-1.0)


# --- arbitrate ---------------------------------------------------------------


def test_calm_gives_brain():
    out = arbitrate(status(0.0), AuthorityState(), 0.0, LO, HI, RMAX)
    assert out.mode is Mode.BRAIN
    assert out.alpha == 1.0
    assert out.switch_count == 0


def test_persistent_risk_gives_auto():
    auth = AuthorityState()
    for k in range(5):
        auth = arbitrate(status(5.0), auth, k * 1.0, LO, HI, RMAX)
    assert auth.mode is Mode.AUTO
    assert auth.alpha == 0.0
    assert auth.switch_count == 1


def test_hand_traced_hysteresis_sequence():
    # five steps, 1 s apart, thresholds lo=1 hi=3, min switch spacing 0.5 s:
    #   t=0  rho=0.5  -> BRAIN (calm, no switch yet)       alpha = 1
    #   t=1  rho=3.5  -> AUTO  (crossed hi; first switch)  alpha = 0
    #   t=2  rho=2.0  -> AUTO  (gap retains the autopilot) alpha = 0.5
    #   t=3  rho=2.5  -> AUTO  (still the gap)             alpha = 0.25
    #   t=4  rho=0.8  -> BRAIN (fell below lo; switch 2)   alpha = 1
    auth = AuthorityState()
    trace = []
    for t, rho in enumerate([0.5, 3.5, 2.0, 2.5, 0.8]):
        auth = arbitrate(status(rho), auth, float(t), LO, HI, RMAX)
        trace.append((auth.mode, auth.alpha, auth.switch_count))
    assert trace == [
        (Mode.BRAIN, 1.0, 0),
        (Mode.AUTO, 0.0, 1),
        (Mode.AUTO, 0.5, 1),
        (Mode.AUTO, 0.25, 1),
        (Mode.BRAIN, 1.0, 2),
    ]


def test_gap_from_brain_blends():
    auth = arbitrate(status(2.0), AuthorityState(), 0.0, LO, HI, RMAX)
    assert auth.mode is Mode.BLEND
    assert auth.alpha == pytest.approx(0.5)
    # and the blend releases to either side
    assert arbitrate(status(0.5), auth, 1.0, LO, HI, RMAX).mode is Mode.BRAIN
    assert arbitrate(status(3.5), auth, 1.0, LO, HI, RMAX).mode is Mode.AUTO


def test_switch_rate_limit_defers_but_keeps_pending():
    auth = AuthorityState()
    auth = arbitrate(status(5.0), auth, 0.0, LO, HI, RMAX)  # -> AUTO at t=0
    assert auth.mode is Mode.AUTO and auth.switch_count == 1
    # rho calms immediately, but 0.5 s have not elapsed: label is deferred
    auth = arbitrate(status(0.0), auth, 0.2, LO, HI, RMAX)
    assert auth.mode is Mode.AUTO
    assert auth.alpha == 1.0  # alpha tracks rho regardless of the label
    assert auth.switch_count == 1
    # once the spacing has elapsed the deferred change goes through
    auth = arbitrate(status(0.0), auth, 0.6, LO, HI, RMAX)
    assert auth.mode is Mode.BRAIN
    assert auth.switch_count == 2


def test_switch_times_respect_rate_limit_over_sequence():
    rng = np.random.default_rng(17)
    auth = AuthorityState()
    switch_times = []
    t = 0.0
    for _ in range(2000):
        t += 0.01
        rho = float(rng.uniform(0.0, 5.0))
        new = arbitrate(status(rho), auth, t, LO, HI, RMAX)
        if new.switch_count > auth.switch_count:
            switch_times.append(t)
        auth = new
    assert len(switch_times) > 3  # the sequence actually switches
    spacing = np.diff(switch_times)
    assert (spacing >= 1.0 / RMAX - 1e-12).all()


def test_bad_thresholds():
    with pytest.raises(BadThresholds):
        arbitrate(status(1.0), AuthorityState(), 0.0, 3.0, 3.0, RMAX)
    with pytest.raises(BadThresholds):
        arbitrate(status(1.0), AuthorityState(), 0.0, -1.0, 3.0, RMAX)
    with pytest.raises(BadThresholds):
        arbitrate(status(1.0), AuthorityState(), 0.0, 1.0, 3.0, 0.0)


@given(st.floats(min_value=0.0, max_value=100.0), st.floats(min_value=0.0, max_value=100.0))
def test_alpha_monotone_and_bounded(r1, r2):
    a1, a2 = authority_ramp(r1, LO, HI), authority_ramp(r2, LO, HI)
    assert 0.0 <= a1 <= 1.0 and not math.isnan(a1)
    if r1 <= r2:
        assert a1 >= a2


def test_alpha_piecewise_linear_inside_gap():
    for rho in np.linspace(LO, HI, 11):
        want = (HI - rho) / (HI - LO)
        assert authority_ramp(float(rho), LO, HI) == pytest.approx(want)


# --- blend --------------------------------------------------------------------

BRAIN_SP = CommandSetpoint(pitch_offset=-0.1, roll_offset=0.05, yaw_rate=0.3, vertical_velocity=1.0)
AUTO_SP = CommandSetpoint(pitch_offset=0.1, roll_offset=-0.02, yaw_rate=-0.1, vertical_velocity=0.0)


def test_blend_endpoints():
    assert blend(BRAIN_SP, AUTO_SP, 1.0) == BRAIN_SP
    assert blend(BRAIN_SP, AUTO_SP, 0.0) == AUTO_SP


def test_blend_midpoint():
    mid = blend(BRAIN_SP, AUTO_SP, 0.5)
    assert mid.pitch_offset == pytest.approx(0.0)
    assert mid.roll_offset == pytest.approx(0.015)
    assert mid.yaw_rate == pytest.approx(0.1)
    assert mid.vertical_velocity == pytest.approx(0.5)


def test_blend_rejects_bad_alpha():
    with pytest.raises(ValueError):
        blend(BRAIN_SP, AUTO_SP, 1.2)
    with pytest.raises(ValueError):
        blend(BRAIN_SP, AUTO_SP, -0.1)
