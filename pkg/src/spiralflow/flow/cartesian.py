"""Unit-speed descent in the Cartesian chart, parametrized by arc length.

Only sensible where ``r`` is representable; near the origin use the
log-polar kernel instead.
"""

from __future__ import annotations

import math

from ..field import Convention, CriticalPointError, DomainError, FieldHandle, direction_field
from ..geom import LogPolarPoint, lift_angle
from ._pykernel import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54, A61, A62, A63, A64, A65,
    B1, B3, B4, B5, B6, E1, E3, E4, E5, E6, E7, NAN,
)

_NAN3 = (NAN, NAN, NAN)


def _make_rhs(handle: FieldHandle, orient: float):
    def rhs(x, y):
        r = math.sqrt(x * x + y * y)
        if not r > 0.0 or r != r:
            return _NAN3
        th = math.atan2(y, x)
        try:
            d = direction_field(handle, LogPolarPoint(-math.log(r), th), Convention.EUCLIDEAN)
        except (CriticalPointError, DomainError, ValueError):
            return _NAN3
        c, s = x / r, y / r
        # conformal chart: unit (d_rho, d_theta) maps to -d_rho e_r + d_theta e_theta
        vx = -d.d_rho * c - d.d_theta * s
        vy = -d.d_rho * s + d.d_theta * c
        return orient * vx, orient * vy, d.log_factored_magnitude

    return rhs


def _dp(rhs, x0, y0, k1, h):
    a, b = k1[0], k1[1]
    k2 = rhs(x0 + h * (A21 * a), y0 + h * (A21 * b))
    k3 = rhs(x0 + h * (A31 * a + A32 * k2[0]), y0 + h * (A31 * b + A32 * k2[1]))
    k4 = rhs(
        x0 + h * (A41 * a + A42 * k2[0] + A43 * k3[0]),
        y0 + h * (A41 * b + A42 * k2[1] + A43 * k3[1]),
    )
    k5 = rhs(
        x0 + h * (A51 * a + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
        y0 + h * (A51 * b + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
    )
    k6 = rhs(
        x0 + h * (A61 * a + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
        y0 + h * (A61 * b + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
    )
    xn = x0 + h * (B1 * a + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0])
    yn = y0 + h * (B1 * b + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1])
    k7 = rhs(xn, yn)
    ex = h * (E1 * a + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0])
    ey = h * (E1 * b + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1])
    return xn, yn, ex, ey, k7


def _rk4(rhs, x0, y0, k1, h):
    k2 = rhs(x0 + 0.5 * h * k1[0], y0 + 0.5 * h * k1[1])
    k3 = rhs(x0 + 0.5 * h * k2[0], y0 + 0.5 * h * k2[1])
    k4 = rhs(x0 + h * k3[0], y0 + h * k3[1])
    xn = x0 + h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
    yn = y0 + h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
    return xn, yn, 0.0, 0.0, rhs(xn, yn)


def _rho(x, y):
    r = math.sqrt(x * x + y * y)
    return -math.log(r) if r > 0.0 else math.inf


def integrate_cartesian(
    handle, orient, r0, theta0, method, rel_tol, abs_tol,
    h_init, h_min, h_max, max_steps, rho_max, log_floor, max_arc, rho_domain_min,
):
    """Same contract and status codes as the log-polar kernels."""
    rhs = _make_rhs(handle, orient)
    step = _dp if method == 0 else _rk4
    x, y = r0 * math.cos(theta0), r0 * math.sin(theta0)
    s = 0.0
    k = rhs(x, y)
    rho = -math.log(r0)
    S, R, T, G = [s], [rho], [theta0], [k[2]]
    if k[2] != k[2] or k[2] < log_floor:
        return S, R, T, G, 1, 0
    if rho >= rho_max:
        return S, R, T, G, 0, 0
    if max_arc <= 0.0:
        return S, R, T, G, 2, 0

    th_prev = theta0
    h = h_init
    nsteps = nrej = 0
    status = -1
    while True:
        if nsteps >= max_steps:
            status = 4
            break
        xn, yn, ex, ey, kn = step(rhs, x, y, k, h)
        err = 0.0
        if method == 0:
            e1 = abs(ex) / (abs_tol + rel_tol * max(abs(x), abs(xn)))
            e2 = abs(ey) / (abs_tol + rel_tol * max(abs(y), abs(yn)))
            err = NAN if (e1 != e1 or e2 != e2) else max(e1, e2)
            if not err <= 1.0:
                nrej += 1
                if h <= h_min:
                    status = 5
                    break
                fac = 0.2 if err != err else max(0.2, 0.9 * err ** -0.2)
                h = max(h * fac, h_min)
                continue
        elif not (xn == xn and yn == yn and kn[0] == kn[0]):
            status = 5
            break
        nsteps += 1
        used_h = h
        if _rho(xn, yn) >= rho_max:
            used_h, (xn, yn, _, _, kn) = _refine(
                step, rhs, x, y, k, h, lambda res, hh: _rho(res[0], res[1]), rho_max
            )
            status = 0
        elif s + h >= max_arc:
            used_h = max_arc - s
            xn, yn, _, _, kn = step(rhs, x, y, k, used_h)
            status = 2
        x, y, k = xn, yn, kn
        s = s + used_h
        rn = math.sqrt(x * x + y * y)
        th_prev = lift_angle(th_prev, math.atan2(y, x))
        S.append(s)
        R.append(-math.log(rn) if rn > 0.0 else math.inf)
        T.append(th_prev)
        G.append(k[2])
        if status >= 0:
            break
        if R[-1] < rho_domain_min:
            status = 3
            break
        if k[2] < log_floor:
            status = 1
            break
        if method == 0:
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = min(h * fac, h_max)
    return S, R, T, G, status, nrej


def _refine(step, rhs, x, y, k, h, value, target):
    lo, hi = 0.0, h
    best = (h, step(rhs, x, y, k, h))
    tol = 1e-13 * max(1.0, abs(target))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        res = step(rhs, x, y, k, mid)
        v = value(res, mid)
        if v >= target:
            hi = mid
            best = (mid, res)
            if v - target <= tol:
                break
        else:
            lo = mid
    return best
