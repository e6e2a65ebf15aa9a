"""The spiral ``gamma(t) = (1/t, log(log(t)))``, ``t >= 2``, in polar form.

Closed forms for the point, the speed and the secant angle, plus the tail
length ``int_s^inf |gamma'(t)| dt`` by adaptive Gauss-Kronrod quadrature.

For the tail, ``u = 1/t`` gives ``int_0^{1/s} sqrt(1 + 1/log(u)^2) du``, whose
integrand has a logarithmic singularity at ``u = 0`` that defeats the
Kronrod error estimate. Writing ``u = exp(-w)/s`` turns it into
``(1/s) int_0^inf exp(-w) sqrt(1 + 1/(log(s) + w)^2) dw``: smooth, and
cut off at a ``W`` with a rigorous bound on the discarded part.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .geom import LogPolarPoint, PolarPoint

T_MIN = 2.0
DEFAULT_TOL = 1e-10

# 15-point Kronrod rule with its embedded 7-point Gauss rule
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights placed on the odd Kronrod slots
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[:-1][::-1]])


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the tolerance within its budget."""


@dataclass(frozen=True)
class TailLengthResult:
    s: float
    length: float
    abs_error_estimate: float

    @property
    def lower_bound(self) -> float:
        return 1.0 / self.s

    @property
    def upper_bound(self) -> float:
        return (1.0 + 1.0 / math.log(self.s) ** 2) / self.s

    @property
    def ratio(self) -> float:
        """Remaining length over distance to the origin, ``length * s``."""
        return self.length * self.s


def _check_t(t: float) -> None:
    if not t >= T_MIN:
        raise ValueError(f"curve parameter must be >= {T_MIN}, got {t}")


def gamma_point(t: float) -> PolarPoint:
    _check_t(t)
    return PolarPoint(1.0 / t, math.log(math.log(t)))


def gamma_logpolar(rho_t: float) -> LogPolarPoint:
    """``gamma`` at ``t = exp(rho_t)`` in the log-polar chart; any ``rho_t >= log 2``."""
    if not rho_t >= math.log(T_MIN):
        raise ValueError(f"rho_t must be >= log 2, got {rho_t}")
    return LogPolarPoint(rho_t, math.log(rho_t))


def gamma_speed(t: float) -> float:
    """``|gamma'(t)| = t**-2 sqrt(1 + 1/log(t)**2)``."""
    _check_t(t)
    L = math.log(t)
    return math.sqrt(1.0 + 1.0 / (L * L)) / (t * t)


def gamma_tangent_logpolar(rho_t: float) -> tuple[float, float]:
    """Unit tangent of ``gamma`` in the log-polar chart (direction of increasing t)."""
    # d(rho)/dt = 1/t, d(theta)/dt = 1/(t rho)
    n = math.sqrt(1.0 + 1.0 / (rho_t * rho_t))
    return 1.0 / n, (1.0 / rho_t) / n


def secant_angle_closed_form(rho_t: float) -> float:
    """Unwrapped angle of the unit secant ``gamma(t)/|gamma(t)|``, ``rho_t = log t``."""
    if not rho_t >= math.log(T_MIN):
        raise ValueError(f"rho_t must be >= log 2, got {rho_t}")
    return math.log(rho_t)


def _scaled_tail_integrand(L: float):
    def f(w: np.ndarray) -> np.ndarray:
        v = L + w
        return np.exp(-w) * np.sqrt(1.0 + 1.0 / (v * v))

    return f


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = f(c + h * _NODES)
    k = h * float(np.dot(_WK, y))
    g = h * float(np.dot(_WG_FULL, y))
    return k, abs(k - g)


def adaptive_quad(f, a: float, b: float, tol: float, max_intervals: int = 5000):
    """Globally adaptive GK15: bisect the interval with the largest error.

    ``f`` must accept a numpy array of abscissae. Returns ``(value, error)``.
    """
    if not tol > 0.0:
        raise ValueError("tolerance must be positive")
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total_val, total_err = val, err
    n = 1
    while total_err > tol:
        if n >= max_intervals:
            raise QuadratureError(
                f"error estimate {total_err:.3e} above tolerance {tol:.3e} "
                f"after {n} intervals"
            )
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureError("interval cannot be bisected further")
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        n += 1
        total_err += e1 + e2 + neg_err
        if n % 64 == 0 or total_err <= tol:
            # periodic exact re-sum keeps the running error from drifting
            total_err = math.fsum(-item[0] for item in heap)
    total_val = math.fsum(item[3] for item in heap)
    return total_val, total_err


def tail_length(s: float, tol: float = DEFAULT_TOL) -> TailLengthResult:
    """Arc length of ``gamma`` on ``[s, inf)``."""
    _check_t(s)
    L = math.log(s)
    # the integrand is below exp(-w) sqrt(1 + 1/L^2), so the part past W is too
    c = math.sqrt(1.0 + 1.0 / (L * L))
    W = max(1.0, math.log(1000.0 * c / (s * tol)))
    val, err = adaptive_quad(_scaled_tail_integrand(L), 0.0, W, 0.99 * tol * s)
    return TailLengthResult(s, val / s, (err + c * math.exp(-W)) / s)
