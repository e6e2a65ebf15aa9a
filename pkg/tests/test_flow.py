import math

import numpy as np
import pytest

from spiralflow.analysis import chord_lengths, descent_violations, length_distance_series
from spiralflow.field import FieldHandle
from spiralflow.flow import (
    IntegrationError,
    IntegratorConfig,
    Method,
    StopCondition,
    StopReason,
    available_backends,
    default_backend,
    integrate,
    start_on_curve,
    tangency_residual,
)
from spiralflow.geom import LogPolarPoint, PolarPoint

BOWL = FieldHandle.bowl()
SPIRAL = FieldHandle.spiral()
DISPLAYED = FieldHandle.paper_displayed()
THETA0 = 0.9272952
X0 = PolarPoint(0.5, THETA0)
RHO_1E6 = math.log(1e6)
COMPILED = "compiled" in available_backends()


def _run(h, x0, conv="polar_euclidean", cfg=None, stop=None, **kw):
    try:
        return integrate(h, x0, conv, cfg, stop, **kw)
    except IntegrationError as exc:
        return exc.trajectory


def test_bowl_straight_ray():
    tr = integrate(BOWL, X0, stop=StopCondition(rho_max=RHO_1E6))
    assert tr.stop_reason is StopReason.RHO_MAX
    assert tr.r[-1] <= 1e-6 * (1 + 1e-12)
    assert np.all(np.abs(tr.theta - THETA0) <= 1e-9)
    assert tr.s[-1] == pytest.approx(0.5 - 1e-6, abs=1e-7)
    ld = length_distance_series(tr)
    assert np.all(np.abs(ld.ratio - 1.0) <= 1e-9)
    assert descent_violations(tr, 10 * 1e-10) == 0
    assert np.all(np.diff(tr.s) > 0)


def test_bowl_chord_matches_ds():
    cfg = IntegratorConfig()
    tr = integrate(BOWL, X0, cfg=cfg, stop=StopCondition(rho_max=RHO_1E6))
    ds = np.diff(tr.s)
    tol = 5.0 * (cfg.abs_tol + cfg.rel_tol * ds)
    assert np.all(np.abs(chord_lengths(tr) - ds) <= tol)


@pytest.mark.parametrize(
    "h,conv", [(SPIRAL, "polar_euclidean"), (DISPLAYED, "polar_paper"), (BOWL, "polar_euclidean")]
)
def test_chord_never_exceeds_ds(h, conv):
    cfg = IntegratorConfig()
    tr = _run(h, start_on_curve(2.0), conv, cfg)
    ds = np.diff(tr.s)
    assert np.all(chord_lengths(tr) <= ds + 5.0 * (cfg.abs_tol + cfg.rel_tol * ds))


def test_chart_agreement_bowl():
    stop = StopCondition(rho_max=RHO_1E6)
    lp = integrate(BOWL, X0, "polar_euclidean", stop=stop)
    ca = integrate(BOWL, X0, "cartesian_euclidean", stop=stop)
    x = np.interp(ca.s, lp.s, lp.x)
    y = np.interp(ca.s, lp.s, lp.y)
    assert np.max(np.hypot(x - ca.x, y - ca.y)) <= 1e-6
    assert ca.s[-1] == pytest.approx(lp.s[-1], abs=1e-6)


@pytest.mark.parametrize("s_end", [0.05, 0.15, 0.3, 0.45])
def test_chart_agreement_spiral_by_arclength(s_end):
    # both charts stop exactly at the same arc length
    stop = StopCondition(rho_max=math.log(100.0), max_arclength=s_end)
    lp = integrate(SPIRAL, start_on_curve(2.0), "polar_euclidean", stop=stop)
    ca = integrate(SPIRAL, start_on_curve(2.0), "cartesian_euclidean", stop=stop)
    assert lp.stop_reason is ca.stop_reason
    if lp.stop_reason is StopReason.MAX_ARCLENGTH:
        assert lp.s[-1] == pytest.approx(s_end, abs=1e-12)
    assert math.hypot(lp.x[-1] - ca.x[-1], lp.y[-1] - ca.y[-1]) <= 1e-6


def test_spiral_descent_both_charts():
    tr = integrate(SPIRAL, start_on_curve(2.0))
    assert tr.stop_reason is StopReason.RHO_MAX
    assert descent_violations(tr, 1e-9) == 0
    ca = integrate(SPIRAL, start_on_curve(2.0), "cartesian_euclidean",
                   stop=StopCondition(rho_max=math.log(100.0)))
    assert ca.r[-1] >= 0.01 * (1 - 1e-9)
    assert descent_violations(ca, 1e-9) == 0
    fl = ca.f_log
    assert np.all(np.diff(fl) <= 1e-9)


def test_paper_field_run_recorded():
    tr = integrate(DISPLAYED, start_on_curve(2.0), "polar_paper")
    assert tr.stop_reason is StopReason.RHO_MAX
    assert tr.rho[-1] == pytest.approx(20.0, abs=1e-9)
    assert len(tr) > 10


def test_step_underflow_carries_partial_trajectory():
    with pytest.raises(IntegrationError) as info:
        integrate(DISPLAYED, start_on_curve(2.0), "polar_euclidean")
    tr = info.value.trajectory
    assert tr.stop_reason is StopReason.STEP_UNDERFLOW
    assert len(tr) > 1


def test_immediate_stop_single_sample():
    tr = integrate(BOWL, X0, stop=StopCondition(rho_max=0.1))
    assert len(tr) == 1 and tr.stop_reason is StopReason.RHO_MAX
    tr = integrate(BOWL, X0, stop=StopCondition(max_arclength=0.0))
    assert len(tr) == 1 and tr.stop_reason is StopReason.MAX_ARCLENGTH


def test_max_arclength_is_hit():
    tr = integrate(BOWL, X0, stop=StopCondition(max_arclength=0.3))
    assert tr.stop_reason is StopReason.MAX_ARCLENGTH
    assert tr.s[-1] == pytest.approx(0.3, abs=1e-12)
    assert tr.r[-1] == pytest.approx(0.2, abs=1e-9)


def test_ascent_leaves_domain():
    tr = integrate(SPIRAL, PolarPoint(0.4, 0.0), ascent=True)
    assert tr.stop_reason is StopReason.DOMAIN_EXIT
    assert tr.r[-1] > 0.5
    with pytest.raises(IntegrationError):
        integrate(SPIRAL, PolarPoint(0.4, 0.0), stop=StopCondition(domain_exit=False), ascent=True)


def test_max_steps():
    tr = integrate(BOWL, X0, cfg=IntegratorConfig(max_steps=3))
    assert tr.stop_reason is StopReason.MAX_STEPS and len(tr) == 4


def test_critical_point_floor():
    tr = integrate(BOWL, X0, stop=StopCondition(rho_max=math.inf, grad_floor=1e-3))
    assert tr.stop_reason is StopReason.CRITICAL_POINT
    assert tr.grad_log[-1] < math.log(1e-3)


def test_rk4_fixed():
    cfg = IntegratorConfig(method=Method.RK4_FIXED, h_init=0.01, h_min=0.01, h_max=0.01)
    tr = integrate(BOWL, X0, cfg=cfg, stop=StopCondition(rho_max=RHO_1E6))
    assert tr.s[-1] == pytest.approx(0.5 - 1e-6, abs=1e-9)
    tr4 = integrate(SPIRAL, start_on_curve(2.0), cfg=cfg, stop=StopCondition(rho_max=5.0))
    ref = integrate(SPIRAL, start_on_curve(2.0), stop=StopCondition(rho_max=5.0))
    assert tr4.theta[-1] == pytest.approx(ref.theta[-1], abs=1e-6)
    assert tr4.s[-1] == pytest.approx(ref.s[-1], abs=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(h_min=1.0, h_init=0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)
    with pytest.raises(ValueError):
        StopCondition(rho_max=math.inf, grad_floor=0.0, domain_exit=False)


def test_start_outside_domain():
    from spiralflow.field import DomainError

    with pytest.raises(DomainError):
        integrate(SPIRAL, PolarPoint(0.7, 0.0))
    with pytest.raises(DomainError):
        integrate(SPIRAL, LogPolarPoint(0.1, 0.0))


def test_determinism():
    a = integrate(SPIRAL, start_on_curve(2.0))
    b = integrate(SPIRAL, start_on_curve(2.0))
    for col in ("s", "rho", "theta", "grad_log", "f_log"):
        assert np.array_equal(getattr(a, col), getattr(b, col))


CASES = [
    (SPIRAL, "polar_euclidean"),
    (DISPLAYED, "polar_paper"),
    (SPIRAL, "polar_paper"),
    (DISPLAYED, "polar_euclidean"),
    (BOWL, "polar_euclidean"),
]


@pytest.mark.skipif(not COMPILED, reason="compiled kernel not built")
@pytest.mark.parametrize("h,conv", CASES)
def test_backends_bit_identical(h, conv):
    a = _run(h, start_on_curve(2.0), conv, backend="compiled")
    b = _run(h, start_on_curve(2.0), conv, backend="python")
    assert a.meta["backend"] == "compiled" and b.meta["backend"] == "python"
    assert a.stop_reason is b.stop_reason
    for col in ("s", "rho", "theta", "grad_log"):
        assert np.array_equal(getattr(a, col), getattr(b, col))


@pytest.mark.skipif(not COMPILED, reason="compiled kernel not built")
def test_backends_agree_in_rescaled_regime():
    x0 = LogPolarPoint(310.0, math.log(310.0))
    stop = StopCondition(rho_max=330.0)
    a = _run(DISPLAYED, x0, "polar_paper", stop=stop, backend="compiled")
    b = _run(DISPLAYED, x0, "polar_paper", stop=stop, backend="python")
    assert np.array_equal(a.rho, b.rho) and np.array_equal(a.theta, b.theta)
    assert np.array_equal(a.grad_log, b.grad_log)


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("SPIRALFLOW_BACKEND", "python")
    assert default_backend() == "python"
    tr = integrate(BOWL, X0, stop=StopCondition(rho_max=2.0))
    assert tr.meta["backend"] == "python"
    monkeypatch.delenv("SPIRALFLOW_BACKEND")
    assert default_backend() == ("compiled" if COMPILED else "python")
    with pytest.raises(ValueError):
        integrate(BOWL, X0, backend="gpu")


def test_tangency_residuals():
    assert tangency_residual(DISPLAYED, "paper", 2.0) < 1e-10
    for t in np.geomspace(2.0, 1e6, 50):
        assert tangency_residual(DISPLAYED, "paper", float(t)) < 1e-9
    v = tangency_residual(SPIRAL, "euclidean", 2.0)
    assert 0.0 < v < math.pi
    with pytest.raises(ValueError):
        tangency_residual(SPIRAL, "euclidean", 1.0)


def test_samples_view():
    tr = integrate(BOWL, X0, stop=StopCondition(rho_max=1.0))
    smp = tr.samples
    assert len(smp) == len(tr)
    assert smp[0].q.rho == pytest.approx(math.log(2.0))
    assert smp[-1].f_value.to_float() == pytest.approx(0.5 * tr.r[-1] ** 2)
    assert tr.final.rho == pytest.approx(1.0, abs=1e-12)
