import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bopert.errors import MeanResidual
from bopert.gauge import GaugeParams, boost_frame, from_zero_mean, gauge_params, mean, to_zero_mean
from bopert.spectral import TorusField, shift


def field(N, seed, m=0.0):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
    c[0] = m
    return TorusField(c)


def test_mean_examples():
    assert mean(TorusField.from_modes(3, {1: 1.0})) == 0
    assert mean(TorusField.from_modes(3, {0: 3.0})) == 3
    assert mean(TorusField.from_modes(3, {0: 1.0, 1: 0.5})) == 1


def test_params_closed_forms():
    u0 = TorusField.from_modes(4, {0: 0.5, 1: 1.0})
    gp = gauge_params(1.0, u0)
    assert gp.c0 == -0.5
    assert gp.c(0) == -0.5 and gp.d(0) == 0
    assert abs(gp.c(1) + 0.5 * math.e) < 1e-15
    assert abs(gp.c(1) + 1.359141) < 1e-6
    assert abs(gp.d(1) + 0.5 * (math.e - 1)) < 1e-15
    assert abs(gp.d(1) + 0.859141) < 1e-6


def test_galilei_branch_exact():
    gp = gauge_params(0.0, TorusField.from_modes(2, {0: 0.5}))
    for t in (0.0, 0.3, 1.0, 7.0):
        assert gp.d(t) == -0.5 * t
        assert gp.c(t) == -0.5


@given(st.floats(-1e-6, 1e-6), st.floats(0, 5))
def test_series_branch_continuous(a0, t):
    gp = GaugeParams(a0, 0.7)
    # compare with an extended-precision closed form
    import mpmath

    mpmath.mp.dps = 40
    x = mpmath.mpf(a0) * mpmath.mpf(t)
    exact = 0.7 * t if x == 0 else float(mpmath.mpf(0.7) * mpmath.expm1(x) / mpmath.mpf(a0))
    assert abs(gp.d(t) - exact) <= 1e-15 * max(1.0, abs(exact))


def test_zero_mean_identity():
    u = field(6, 1)
    gp = gauge_params(2.0, u)
    assert gp.trivial
    assert np.array_equal(to_zero_mean(u, 0.8, gp).coeffs, u.coeffs)
    assert np.array_equal(from_zero_mean(u, 0.8, gp).coeffs, u.coeffs)


def test_t0_subtracts_mean():
    u = field(6, 2, m=0.5)
    v = to_zero_mean(u, 0.0, gauge_params(1.0, u))
    assert np.array_equal(v.coeffs[1:], u.coeffs[1:])
    assert v.coeffs[0] == 0


def test_phase_convention():
    # v(x) = u(x - 2d) + c: check on point samples
    u = field(4, 3, m=0.25)
    gp = gauge_params(0.0, u)
    t = 0.9
    v = to_zero_mean(u, t, gp)
    x = np.linspace(0, 2 * np.pi, 7)
    n = np.arange(-4, 5)

    def ev(f, pts):
        return np.real(np.exp(1j * np.outer(pts, n)) @ f.two_sided())

    assert np.max(np.abs(ev(v, x) - (ev(u, x - 2 * gp.d(t)) + gp.c(t)))) < 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**31), st.floats(-2, 2), st.floats(-3, 3), st.floats(0, 3))
def test_round_trip(N, seed, a0, m, t):
    u0 = field(N, seed, m)
    gp = gauge_params(a0, u0)
    # a state at time t of the original flow has mean m e^{a0 t}
    ut = TorusField(np.concatenate([[m * math.exp(a0 * t)], field(N, seed + 1).coeffs[1:]]))
    v = to_zero_mean(ut, t, gp)
    assert abs(mean(v)) <= 1e-12 * max(1.0, abs(m) * math.exp(a0 * t))
    back = from_zero_mean(v, t, gp)
    assert (back - ut).l2_norm() <= 1e-12 * max(1.0, ut.l2_norm())


def test_mean_residual():
    u = field(3, 4, m=0.5)
    with pytest.raises(MeanResidual):
        to_zero_mean(u, 0.0, GaugeParams(1.0, 0.1))


def test_params_dict():
    gp = GaugeParams(1.0, -0.5)
    assert gp.to_dict() == {"a0": 1.0, "c0": -0.5}
    assert GaugeParams.from_dict(gp.to_dict()) == gp


def test_boost_frame():
    u = field(5, 6)
    assert np.array_equal(boost_frame(u, 0.0, 3.0).coeffs, u.coeffs)
    delta = 2.0
    full = boost_frame(u, 2 * np.pi * delta, delta)
    assert np.max(np.abs(full.coeffs - u.coeffs)) < 1e-13
    two = boost_frame(boost_frame(u, 0.4, delta), 0.7, delta)
    assert np.max(np.abs(two.coeffs - boost_frame(u, 1.1, delta).coeffs)) < 1e-14
    assert np.max(np.abs(boost_frame(u, 0.4, delta).coeffs - shift(u, -0.2).coeffs)) < 1e-15
