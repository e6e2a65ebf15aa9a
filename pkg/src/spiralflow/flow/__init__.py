"""Integration of the normalized descent flow ``x'(s) = -grad f / |grad f|``.

The log-polar integration loop has a compiled implementation
(``_ckernel``, built from Cython) and a pure-Python one (``_pykernel``).
The compiled one is used when importable; set ``SPIRALFLOW_BACKEND=python``
or pass ``backend="python"`` to force the fallback.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..curve import gamma_logpolar, gamma_tangent_logpolar
from ..field import (
    Convention,
    DomainError,
    FieldHandle,
    FieldKind,
    direction_field,
)
from ..geom import LogPolarPoint, PolarPoint, logpolar_to_polar
from . import _pykernel
from .cartesian import integrate_cartesian
from .types import (
    STATUS_CODES,
    IntegrationError,
    IntegratorConfig,
    Method,
    StopCondition,
    StopReason,
    Trajectory,
    TrajectoryConvention,
    TrajectorySample,
)

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

__all__ = [
    "IntegrationError",
    "IntegratorConfig",
    "Method",
    "StopCondition",
    "StopReason",
    "Trajectory",
    "TrajectoryConvention",
    "TrajectorySample",
    "available_backends",
    "default_backend",
    "f_values_logpolar",
    "integrate",
    "tangency_residual",
]


def available_backends() -> list[str]:
    return ["compiled", "python"] if _ckernel is not None else ["python"]


def default_backend() -> str:
    forced = os.environ.get("SPIRALFLOW_BACKEND", "").strip().lower()
    if forced in ("python", "compiled"):
        return forced
    return "compiled" if _ckernel is not None else "python"


def _kernel(backend: str):
    if backend == "auto":
        backend = default_backend()
    if backend == "compiled":
        if _ckernel is None:
            raise RuntimeError("compiled kernel not available; rebuild or use backend='python'")
        return _ckernel
    if backend == "python":
        return _pykernel
    raise ValueError(f"unknown backend {backend!r}")


def f_values_logpolar(h: FieldHandle, rho: np.ndarray, theta: np.ndarray):
    """Vectorized field values as ``(sign, log_magnitude)`` arrays."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if h.kind is FieldKind.QUADRATIC_BOWL:
        return np.ones_like(rho, dtype=np.int8), -2.0 * rho - math.log(2.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        a = rho / (1.0 + rho * rho * np.exp(-2.0 * rho))
        g = 1.0 - a * np.sin(theta - np.log(rho))
        sign = np.sign(g).astype(np.int8)
        flog = -np.exp(rho) + np.log(np.abs(g))
    return sign, flog


_CONV_CODES = {
    TrajectoryConvention.POLAR_EUCLIDEAN: 0,
    TrajectoryConvention.POLAR_PAPER: 1,
}


def integrate(
    h: FieldHandle,
    x0: PolarPoint | LogPolarPoint,
    convention: TrajectoryConvention | str = TrajectoryConvention.POLAR_EUCLIDEAN,
    cfg: IntegratorConfig | None = None,
    stop: StopCondition | None = None,
    *,
    ascent: bool = False,
    backend: str = "auto",
) -> Trajectory:
    """Integrate the unit-speed descent flow of ``h`` from ``x0``.

    ``ascent=True`` flips the sign of the field (the literal reading of the
    arc-length form without the minus sign). Raises :class:`IntegrationError`
    on step-size underflow, or on leaving the domain when
    ``stop.domain_exit`` is off; the error carries the partial trajectory.
    """
    cfg = cfg or IntegratorConfig()
    stop = stop or StopCondition()
    convention = TrajectoryConvention(
        convention.replace("-", "_") if isinstance(convention, str) else convention
    )
    if isinstance(x0, LogPolarPoint):
        q0 = x0
        r0 = math.exp(-q0.rho)
        if h.is_spiral and q0.rho < -math.log(h.domain_radius):
            raise DomainError(f"start point outside the domain (rho = {q0.rho})")
    else:
        h.check_domain(x0.r)
        q0 = LogPolarPoint(-math.log(x0.r), x0.theta)
        r0 = x0.r

    orient = -1.0 if ascent else 1.0
    method = 0 if cfg.method is Method.RK45_ADAPTIVE else 1
    log_floor = math.log(stop.grad_floor) if stop.grad_floor > 0 else -math.inf
    rho_dom = -math.log(h.domain_radius) if math.isfinite(h.domain_radius) else -math.inf
    rho_max = stop.rho_max if math.isfinite(stop.rho_max) else math.inf
    common = (
        method, cfg.rel_tol, cfg.abs_tol, cfg.h_init, cfg.h_min, cfg.h_max,
        int(cfg.max_steps), rho_max, log_floor, stop.max_arclength, rho_dom,
    )

    if convention is TrajectoryConvention.CARTESIAN_EUCLIDEAN:
        used = "python"
        S, R, T, G, status, nrej = integrate_cartesian(h, orient, r0, q0.theta, *common)
    else:
        kern = _kernel(backend)
        used = kern.BACKEND
        kind = _pykernel.KIND_CODES[h.kind]
        S, R, T, G, status, nrej = kern.integrate_logpolar(
            kind, _CONV_CODES[convention], orient, q0.rho, q0.theta, *common
        )

    rho = np.asarray(R, dtype=float)
    theta = np.asarray(T, dtype=float)
    fs, fl = f_values_logpolar(h, rho, theta)
    reason = STATUS_CODES[status]
    traj = Trajectory(
        s=np.asarray(S, dtype=float),
        rho=rho,
        theta=theta,
        f_sign=fs,
        f_log=fl,
        grad_log=np.asarray(G, dtype=float),
        stop_reason=reason,
        convention=convention,
        field_kind=h.kind,
        meta={
            "backend": used,
            "n_accepted": len(S) - 1,
            "n_rejected": int(nrej),
            "ascent": ascent,
            "method": cfg.method.value,
        },
    )
    if reason is StopReason.STEP_UNDERFLOW:
        raise IntegrationError(
            f"step size fell below h_min={cfg.h_min} after {len(S) - 1} steps", traj
        )
    if reason is StopReason.DOMAIN_EXIT and not stop.domain_exit:
        raise IntegrationError("trajectory left the field's domain", traj)
    return traj


def _convention(convention) -> Convention:
    if isinstance(convention, TrajectoryConvention):
        if convention is TrajectoryConvention.POLAR_PAPER:
            return Convention.PAPER
        return Convention.EUCLIDEAN
    name = str(getattr(convention, "value", convention)).replace("-", "_")
    if name in ("paper", "polar_paper"):
        return Convention.PAPER
    if name in ("euclidean", "polar_euclidean", "cartesian_euclidean"):
        return Convention.EUCLIDEAN
    raise ValueError(f"unknown convention {convention!r}")


def tangency_residual(
    h: FieldHandle,
    convention,
    t: float | None = None,
    *,
    rho_t: float | None = None,
    floor: float = 0.0,
) -> float:
    """Unsigned angle (radians) between the flow direction at ``gamma(t)``
    and the curve tangent, measured in the log-polar chart.

    The chart is conformal, so this is also the Euclidean angle. Pass
    ``rho_t = log t`` for parameters beyond floating-point range.
    """
    if rho_t is None:
        if t is None:
            raise TypeError("give t or rho_t")
        if not t >= 2.0:
            raise ValueError(f"curve parameter must be >= 2, got {t}")
        rho_t = math.log(t)
    q = gamma_logpolar(rho_t)
    d = direction_field(h, q, _convention(convention), floor=floor)
    u, v = gamma_tangent_logpolar(rho_t)
    cross = d.d_rho * v - d.d_theta * u
    dot = d.d_rho * u + d.d_theta * v
    return math.atan2(abs(cross), dot)


def start_on_curve(t: float = 2.0) -> PolarPoint:
    """``gamma(t)`` as a start point, with angle exactly ``log(log(t))``."""
    return logpolar_to_polar(gamma_logpolar(math.log(t)))

