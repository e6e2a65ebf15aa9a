import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from spiralflow.curve import (
    QuadratureError,
    adaptive_quad,
    gamma_logpolar,
    gamma_point,
    gamma_speed,
    gamma_tangent_logpolar,
    secant_angle_closed_form,
    tail_length,
)

# mpmath, 40 digits
SPEED_2 = 0.43884571470261674
SPEED_E = 0.19139299302082185
TAIL_2 = 0.64116756566653790
TAIL_EE = 0.068696523026517641
TAIL_10 = 0.10535305344937424
TAIL_1E6 = 1.0023023033357516e-6


def test_gamma_point_examples():
    p = gamma_point(2.0)
    assert p.r == 0.5 and p.theta == pytest.approx(-0.36651292058166433, rel=1e-15)
    p = gamma_point(math.e)
    assert p.r == pytest.approx(0.36787944117144233) and p.theta == pytest.approx(0.0, abs=1e-16)
    p = gamma_point(math.exp(math.e))
    assert p.r == pytest.approx(0.065988035845312537, rel=1e-15) and p.theta == pytest.approx(1.0)
    with pytest.raises(ValueError):
        gamma_point(1.5)


def test_speed_examples():
    assert gamma_speed(2.0) == pytest.approx(SPEED_2, rel=1e-15)
    assert gamma_speed(math.e) == pytest.approx(SPEED_E, rel=1e-15)


@given(st.floats(2.0, 1e12))
def test_speed_bound(t):
    assert gamma_speed(t) <= math.sqrt(1 + 1 / math.log(2) ** 2) / t ** 2 * (1 + 1e-15)


def test_speed_identity_1000_points():
    for t in np.geomspace(2.0, 1e9, 1000):
        t = float(t)
        L = math.log(t)
        assert gamma_speed(t) ** 2 * t ** 4 == pytest.approx(1 + 1 / L ** 2, rel=1e-13)


def test_tail_length_frozen_values():
    for s, ref in [(2.0, TAIL_2), (math.exp(math.e), TAIL_EE), (10.0, TAIL_10), (1e6, TAIL_1E6)]:
        res = tail_length(s)
        assert res.length == pytest.approx(ref, abs=1e-10)
        assert res.abs_error_estimate <= 1e-10
        assert tail_length(s, tol=1e-12 / s).length == pytest.approx(ref, rel=1e-11)


def test_tail_length_bracket_examples():
    r = tail_length(2.0)
    assert 0.5 <= r.length <= 1.5406844905028039
    assert r.upper_bound == pytest.approx(1.5406844905028039, rel=1e-15)
    r = tail_length(math.exp(math.e))
    assert r.lower_bound == pytest.approx(0.065988035845312537, rel=1e-14)
    assert r.upper_bound == pytest.approx(0.074918545366665, rel=1e-12)
    assert r.lower_bound <= r.length <= r.upper_bound


def test_tail_length_against_mpmath_and_scipy():
    for s in (3.0, 50.0, 1e4, 1e8):
        with mpmath.workdps(30):
            ref = mpmath.quad(
                lambda t: mpmath.sqrt(1 + 1 / mpmath.log(t) ** 2) / t ** 2, [s, 10 * s, mpmath.inf]
            )
        res = tail_length(s)
        assert res.length == pytest.approx(float(ref), abs=1e-10)
        assert abs(res.length - float(ref)) <= res.abs_error_estimate + 1e-15
        assert tail_length(s, tol=1e-12 / s).length == pytest.approx(float(ref), rel=1e-11)
        sp, _ = sp_integrate.quad(
            lambda v: math.exp(-v) * math.sqrt(1 + 1 / v ** 2), math.log(s), np.inf,
            epsabs=0.0, epsrel=1e-13, limit=200,
        )
        assert tail_length(s, tol=1e-12 / s).length == pytest.approx(sp, rel=1e-11)


def test_tail_ratio_converges():
    ss = np.geomspace(2.0, 1e6, 50)
    ratios = [tail_length(float(s), tol=1e-10 / s).ratio for s in ss]
    assert all(b <= a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1.0023023, abs=1e-7)
    assert ratios[-1] < 1 + 1 / math.log(1e6) ** 2


def test_adaptive_quad():
    v, e = adaptive_quad(np.sin, 0.0, math.pi, 1e-12)
    assert v == pytest.approx(2.0, abs=1e-12) and e <= 1e-12
    with pytest.raises(ValueError):
        adaptive_quad(np.sin, 0.0, 1.0, 0.0)
    with pytest.raises(QuadratureError):
        adaptive_quad(lambda x: 1.0 / np.sqrt(np.abs(x - 0.3)), 0.0, 1.0, 1e-15, max_intervals=20)


def test_secant_angle():
    assert secant_angle_closed_form(math.e) == 1.0
    for k in (1, 2, 3):
        assert secant_angle_closed_form(math.exp(2 * math.pi * k)) == pytest.approx(2 * math.pi * k, abs=1e-12)
    vals = [secant_angle_closed_form(x) for x in np.geomspace(1.0, 1e100, 100)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_logpolar_forms():
    q = gamma_logpolar(math.log(2.0))
    assert q.r == pytest.approx(0.5, rel=1e-15)
    u, v = gamma_tangent_logpolar(5.0)
    assert math.hypot(u, v) == pytest.approx(1.0) and v / u == pytest.approx(0.2)
    with pytest.raises(ValueError):
        gamma_logpolar(0.5)
