from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_infer, set_membership
from quadshare import kernels
from quadshare.errors import ZeroActivation
from quadshare.fuzzy import FuzzyEngine, FuzzyPartition
from quadshare.tables import DEFAULT_TABLES, GAIN_TARGETS

finite = st.floats(min_value=-6.0, max_value=6.0, allow_nan=False)


@pytest.fixture(scope="module")
def engine():
    return FuzzyEngine()


@pytest.fixture(scope="module")
def engine_hi():
    return FuzzyEngine(resolution=10001)


def test_fuzzify_spot_values():
    part = FuzzyPartition()
    np.testing.assert_allclose(part.fuzzify(0.0), [0, 0, 0, 1, 0, 0, 0], atol=0)
    np.testing.assert_allclose(part.fuzzify(-3.0), [1, 0, 0, 0, 0, 0, 0], atol=0)
    np.testing.assert_allclose(part.fuzzify(0.5), [0, 0, 0, 0.5, 0.5, 0, 0])
    np.testing.assert_allclose(part.fuzzify(-1.25), [0, 0.25, 0.75, 0, 0, 0, 0])
    # beyond the universe the end sets saturate
    np.testing.assert_allclose(part.fuzzify(9.0), [0, 0, 0, 0, 0, 0, 1], atol=0)
    np.testing.assert_allclose(part.fuzzify(-9.0), [1, 0, 0, 0, 0, 0, 0], atol=0)


def test_fuzzify_matches_interp_oracle():
    part = FuzzyPartition()
    xs = np.linspace(-3.5, 3.5, 211)
    for x in xs:
        mu = part.fuzzify(float(x))
        want = [set_membership(float(x), k) for k in range(7)]
        np.testing.assert_allclose(mu, want, atol=1e-15)


def test_partition_of_unity_dense():
    part = FuzzyPartition()
    xs = np.linspace(-3.0, 3.0, 10001)
    worst = max(abs(part.fuzzify(float(x)).sum() - 1.0) for x in xs)
    assert worst <= 1e-12


@given(finite)
def test_fuzzify_properties(x):
    mu = FuzzyPartition().fuzzify(x)
    assert mu.shape == (7,)
    assert np.all(mu >= 0.0) and np.all(mu <= 1.0)
    assert abs(mu.sum() - 1.0) <= 1e-12
    assert np.count_nonzero(mu) <= 2


@settings(max_examples=60, deadline=None)
@given(finite, finite, st.sampled_from(GAIN_TARGETS))
def test_infer_matches_oracle_random(engine_hi, e, ec, target):
    got = engine_hi.infer(e, ec, target)
    want = oracle_infer(e, ec, DEFAULT_TABLES[target].rows, n=10001)
    assert got == pytest.approx(want, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(finite, finite, st.sampled_from(GAIN_TARGETS))
def test_infer_output_bounded(engine, e, ec, target):
    val = engine.infer(e, ec, target)
    assert -3.0 <= val <= 3.0


def test_infer_center_values(engine_hi):
    # pure single-rule firings: centroid of one clipped-at-1 consequent set
    # interior triangle centered at c -> centroid c; end shoulder -> c -/+ 1/3
    assert engine_hi.infer(0.0, 0.0, "kp") == pytest.approx(-1.0, abs=1e-5)
    assert engine_hi.infer(0.0, 0.0, "kd") == pytest.approx(-2.0, abs=1e-5)
    assert engine_hi.infer(0.0, 0.0, "ki") == pytest.approx(3.0 - 1.0 / 3.0, abs=1e-5)
    assert engine_hi.infer(-3.0, -3.0, "ki") == pytest.approx(-3.0 + 1.0 / 3.0, abs=1e-5)


def test_default_resolution_close_to_dense_oracle(engine):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        e, ec = rng.uniform(-3.3, 3.3, size=2)
        t = GAIN_TARGETS[rng.integers(3)]
        want = oracle_infer(e, ec, DEFAULT_TABLES[t].rows, n=10001)
        worst = max(worst, abs(engine.infer(e, ec, t) - want))
    assert worst < 5e-4


def test_backends_agree(engine):
    rng = np.random.default_rng(11)
    for _ in range(100):
        e, ec = rng.uniform(-3.3, 3.3, size=2)
        for t in GAIN_TARGETS:
            a = engine.infer(e, ec, t)
            b = kernels._infer_numpy(
                e, ec,
                engine.e_part.centers, engine.ec_part.centers,
                engine._rules[t], engine._tri, engine.grid,
                engine._weights, engine.h, engine.area_tol,
            )
            assert a == pytest.approx(b, abs=1e-9)


def test_rule_levels_single_cell(engine):
    lev = engine.rule_levels(0.0, 0.0, "kp")
    want = np.zeros(7)
    want[2] = 1.0  # lone NS consequent fires fully
    np.testing.assert_allclose(lev, want, atol=0)


def test_rule_levels_blend(engine):
    # e = -2.5 straddles NB/NM, ec = 0 is pure ZO; table sends those to PB, PM
    lev = engine.rule_levels(-2.5, 0.0, "kp")
    assert lev[6] == pytest.approx(0.5)  # PB from the NB row
    assert lev[5] == pytest.approx(0.5)  # PM from the NM row
    assert lev[[0, 1, 2, 3, 4]].sum() == 0.0


def test_zero_activation_raised():
    eng = FuzzyEngine(area_tol=10.0)
    with pytest.raises(ZeroActivation):
        eng.infer(0.0, 0.0, "kp")


def test_infer_deterministic(engine):
    a = [engine.infer(1.234, -0.567, t) for t in GAIN_TARGETS]
    b = [engine.infer(1.234, -0.567, t) for t in GAIN_TARGETS]
    assert a == b


def test_gain_deltas_order(engine):
    dkp, dki, dkd = engine.gain_deltas(0.0, 0.0)
    assert dkp == pytest.approx(engine.infer(0.0, 0.0, "kp"))
    assert dki == pytest.approx(engine.infer(0.0, 0.0, "ki"))
    assert dkd == pytest.approx(engine.infer(0.0, 0.0, "kd"))


def test_engine_rejects_bad_resolution():
    with pytest.raises(ValueError):
        FuzzyEngine(resolution=2)
