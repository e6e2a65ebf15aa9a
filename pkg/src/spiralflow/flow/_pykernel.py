"""Pure-Python log-polar integration loop.

Reference implementation of the compiled kernel in ``_ckernel.pyx``; both
take the same arguments, perform the same floating-point operations in the
same order and return the same tuple.

State is ``(rho, theta)`` advanced in the chart arc length ``tau``; the
Euclidean arc length ``s`` obeys ``ds/dtau = exp(-rho)`` and is carried as
a quadrature over the stages (it never feeds back into the dynamics).
"""

from __future__ import annotations

import math

from ..field import (
    Convention,
    CriticalPointError,
    DomainError,
    FieldHandle,
    FieldKind,
    direction_field,
)
from ..geom import LogPolarPoint

BACKEND = "python"

KIND_CODES = {FieldKind.SPIRAL: 0, FieldKind.QUADRATIC_BOWL: 1, FieldKind.PAPER_DISPLAYED_SPIRAL: 2}
_HANDLES = {0: FieldHandle.spiral(), 1: FieldHandle.bowl(), 2: FieldHandle.paper_displayed()}
_CONVS = {0: Convention.EUCLIDEAN, 1: Convention.PAPER}

# Dormand-Prince 5(4)
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

NAN = float("nan")
_NAN3 = (NAN, NAN, NAN)


def _make_rhs(kind: int, conv: int, orient: float):
    handle = _HANDLES[kind]
    convention = _CONVS[conv]

    def rhs(rho, theta):
        if rho != rho or theta != theta:
            return _NAN3
        try:
            d = direction_field(handle, LogPolarPoint(rho, theta), convention)
        except (CriticalPointError, DomainError, OverflowError, ValueError):
            return _NAN3
        return (orient * d.d_rho, orient * d.d_theta, d.log_factored_magnitude)

    return rhs


def _dp_step(rhs, r0, t0, k1, h):
    k1r, k1t = k1[0], k1[1]
    x1 = math.exp(-r0)
    r = r0 + h * (A21 * k1r)
    t = t0 + h * (A21 * k1t)
    k2 = rhs(r, t)
    k2r, k2t = k2[0], k2[1]
    x2 = math.exp(-r)
    r = r0 + h * (A31 * k1r + A32 * k2r)
    t = t0 + h * (A31 * k1t + A32 * k2t)
    k3 = rhs(r, t)
    k3r, k3t = k3[0], k3[1]
    x3 = math.exp(-r)
    r = r0 + h * (A41 * k1r + A42 * k2r + A43 * k3r)
    t = t0 + h * (A41 * k1t + A42 * k2t + A43 * k3t)
    k4 = rhs(r, t)
    k4r, k4t = k4[0], k4[1]
    x4 = math.exp(-r)
    r = r0 + h * (A51 * k1r + A52 * k2r + A53 * k3r + A54 * k4r)
    t = t0 + h * (A51 * k1t + A52 * k2t + A53 * k3t + A54 * k4t)
    k5 = rhs(r, t)
    k5r, k5t = k5[0], k5[1]
    x5 = math.exp(-r)
    r = r0 + h * (A61 * k1r + A62 * k2r + A63 * k3r + A64 * k4r + A65 * k5r)
    t = t0 + h * (A61 * k1t + A62 * k2t + A63 * k3t + A64 * k4t + A65 * k5t)
    k6 = rhs(r, t)
    k6r, k6t = k6[0], k6[1]
    x6 = math.exp(-r)
    rn = r0 + h * (B1 * k1r + B3 * k3r + B4 * k4r + B5 * k5r + B6 * k6r)
    tn = t0 + h * (B1 * k1t + B3 * k3t + B4 * k4t + B5 * k5t + B6 * k6t)
    k7 = rhs(rn, tn)
    x7 = math.exp(-rn)
    ds = h * (B1 * x1 + B3 * x3 + B4 * x4 + B5 * x5 + B6 * x6)
    er = h * (E1 * k1r + E3 * k3r + E4 * k4r + E5 * k5r + E6 * k6r + E7 * k7[0])
    et = h * (E1 * k1t + E3 * k3t + E4 * k4t + E5 * k5t + E6 * k6t + E7 * k7[1])
    es = h * (E1 * x1 + E3 * x3 + E4 * x4 + E5 * x5 + E6 * x6 + E7 * x7)
    return rn, tn, ds, er, et, es, k7


def _rk4_step(rhs, r0, t0, k1, h):
    k1r, k1t = k1[0], k1[1]
    x1 = math.exp(-r0)
    r = r0 + 0.5 * h * k1r
    t = t0 + 0.5 * h * k1t
    k2 = rhs(r, t)
    x2 = math.exp(-r)
    r = r0 + 0.5 * h * k2[0]
    t = t0 + 0.5 * h * k2[1]
    k3 = rhs(r, t)
    x3 = math.exp(-r)
    r = r0 + h * k3[0]
    t = t0 + h * k3[1]
    k4 = rhs(r, t)
    x4 = math.exp(-r)
    rn = r0 + h * (k1r + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
    tn = t0 + h * (k1t + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
    kn = rhs(rn, tn)
    ds = h * (x1 + 2.0 * x2 + 2.0 * x3 + x4) / 6.0
    return rn, tn, ds, 0.0, 0.0, 0.0, kn


def integrate_logpolar(
    kind, conv, orient, rho0, theta0, method, rel_tol, abs_tol,
    h_init, h_min, h_max, max_steps, rho_max, log_floor, max_arc, rho_domain_min,
):
    """Returns ``(s, rho, theta, grad_log, status, n_rejected)``.

    ``method`` is 0 for adaptive Dormand-Prince, 1 for fixed-step RK4.
    Status codes follow ``types.STATUS_CODES``.
    """
    rhs = _make_rhs(kind, conv, orient)
    step = _dp_step if method == 0 else _rk4_step

    rho, th, s = rho0, theta0, 0.0
    k = rhs(rho, th)
    S, R, T, G = [s], [rho], [th], [k[2]]
    if k[2] != k[2] or k[2] < log_floor:
        return S, R, T, G, 1, 0
    if rho >= rho_max:
        return S, R, T, G, 0, 0
    if max_arc <= 0.0:
        return S, R, T, G, 2, 0

    h = h_init
    nsteps = 0
    nrej = 0
    status = -1
    while True:
        if nsteps >= max_steps:
            status = 4
            break
        rn, tn, ds, er, et, es, kn = step(rhs, rho, th, k, h)
        err = 0.0
        if method == 0:
            e1 = abs(er) / (abs_tol + rel_tol * max(abs(rho), abs(rn)))
            e2 = abs(et) / (abs_tol + rel_tol * max(abs(th), abs(tn)))
            e3 = abs(es) / (abs_tol + rel_tol * abs(ds))
            err = max(e1, e2, e3)
            # NaN in any component must reject the step
            if e1 != e1 or e2 != e2 or e3 != e3:
                err = NAN
            if not err <= 1.0:
                nrej += 1
                if h <= h_min:
                    status = 5
                    break
                if err != err:
                    fac = 0.2
                else:
                    fac = max(0.2, 0.9 * err ** -0.2)
                h = max(h * fac, h_min)
                continue
        elif not (rn == rn and tn == tn and kn[0] == kn[0]):
            status = 5
            break

        nsteps += 1
        if rn >= rho_max:
            rn, tn, ds, kn = _refine(step, rhs, rho, th, k, h, 0, rho_max, s)
            status = 0
        elif s + ds >= max_arc:
            rn, tn, ds, kn = _refine(step, rhs, rho, th, k, h, 1, max_arc, s)
            status = 2
        rho, th, s, k = rn, tn, s + ds, kn
        S.append(s)
        R.append(rho)
        T.append(th)
        G.append(k[2])
        if status >= 0:
            break
        if rho < rho_domain_min:
            status = 3
            break
        if k[2] < log_floor:
            status = 1
            break
        if method == 0:
            if err == 0.0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = min(h * fac, h_max)
    return S, R, T, G, status, nrej


def _refine(step, rhs, rho, th, k, h, which, target, s0):
    """Bisect the step length so the event lands just past ``target``.

    ``which`` 0 watches rho, 1 watches the arc length.
    """
    lo, hi = 0.0, h
    res = step(rhs, rho, th, k, h)
    best = (res[0], res[1], res[2], res[6])
    tol = 1e-13 * max(1.0, abs(target))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        res = step(rhs, rho, th, k, mid)
        val = res[0] if which == 0 else s0 + res[2]
        if val >= target:
            hi = mid
            best = (res[0], res[1], res[2], res[6])
            if val - target <= tol:
                break
        else:
            lo = mid
    return best
