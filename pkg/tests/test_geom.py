import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spiralflow.geom import (
    TWO_PI,
    CartesianPoint,
    LogPolarPoint,
    PolarPoint,
    chord_over_radius,
    lift_angle,
    logpolar_to_cartesian,
    logpolar_to_polar,
    polar_to_logpolar,
    to_cartesian,
    to_polar,
)

LOGLOG2 = -0.36651292058166433


def test_to_cartesian_examples():
    c = to_cartesian(PolarPoint(1.0, 0.0))
    assert (c.x, c.y) == (1.0, 0.0)
    c = to_cartesian(PolarPoint(0.5, math.pi / 2))
    assert c.x == pytest.approx(0.0, abs=1e-16) and c.y == 0.5
    c = to_cartesian(PolarPoint(0.5, LOGLOG2))
    # mpmath, 40 digits
    assert c.x == pytest.approx(0.46679132818266639, rel=1e-15)
    assert c.y == pytest.approx(-0.17918107024309861, rel=1e-15)


def test_lift_examples():
    assert lift_angle(0.1, 0.2) == 0.2
    assert lift_angle(3.0, -3.0) == pytest.approx(3.2831853071795865, abs=1e-15)
    assert lift_angle(6.2, 0.0) == pytest.approx(TWO_PI, abs=1e-15)


def test_point_validation():
    with pytest.raises(ValueError):
        PolarPoint(0.0, 1.0)
    with pytest.raises(ValueError):
        PolarPoint(-1.0, 1.0)
    with pytest.raises(ValueError):
        CartesianPoint(math.nan, 0.0)
    with pytest.raises(ValueError):
        CartesianPoint(0.0, math.inf)


@given(
    st.floats(-1e4, 1e4, allow_nan=False),
    st.floats(-math.pi, math.pi, allow_nan=False),
)
def test_lift_within_pi(prev, new):
    out = lift_angle(prev, new)
    assert abs(out - prev) <= math.pi + 1e-9
    k = (out - new) / TWO_PI
    assert abs(k - round(k)) < 1e-9


@given(
    st.floats(-8.0, 0.0).map(lambda e: 10.0 ** e),
    st.floats(-50.0, 50.0, allow_nan=False),
)
def test_polar_cartesian_round_trip(r, theta):
    back = to_polar(to_cartesian(PolarPoint(r, theta)), theta_ref=theta)
    assert back.r == pytest.approx(r, rel=1e-12)
    assert back.theta == pytest.approx(theta, rel=1e-12, abs=1e-12)


@given(st.floats(-300.0, 0.0).map(lambda e: 10.0 ** e), st.floats(-10, 10))
def test_logpolar_round_trip(r, theta):
    q = polar_to_logpolar(PolarPoint(r, theta))
    assert q.rho == pytest.approx(math.log(1.0 / r) if r > 1e-300 else -math.log(r))
    p = logpolar_to_polar(q)
    assert p.r == pytest.approx(r, rel=1e-15 * max(1.0, abs(q.rho)))
    assert p.theta == theta
    assert q.r == p.r


def test_logpolar_to_cartesian():
    c = logpolar_to_cartesian(LogPolarPoint(math.log(2.0), LOGLOG2))
    assert c.x == pytest.approx(0.46679132818266639, rel=1e-15)


@given(
    st.floats(0.0, 3.0),
    st.floats(-3.0, 3.0),
    st.floats(-3.0, 3.0),
)
def test_chord_over_radius_matches_direct(rho0, drho, dth):
    q0 = LogPolarPoint(rho0, 0.3)
    q1 = LogPolarPoint(rho0 + drho, 0.3 + dth)
    a, b = logpolar_to_cartesian(q0), logpolar_to_cartesian(q1)
    direct = math.hypot(a.x - b.x, a.y - b.y) / q0.r
    assert chord_over_radius(drho, dth) == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_chord_over_radius_tiny_steps_keep_precision():
    # expm1 and the half-angle sine avoid cancellation
    assert chord_over_radius(1e-12, 0.0) == pytest.approx(1e-12, rel=1e-10)
    assert chord_over_radius(0.0, 1e-12) == pytest.approx(1e-12, rel=1e-10)
