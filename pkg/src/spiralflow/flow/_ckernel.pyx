# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled log-polar integration loop.

Mirrors ``_pykernel.integrate_logpolar`` and ``field.direction_field``
operation by operation (same dual-number passes, same stage sums), so the
two backends agree to the last bit on a platform without FMA contraction.
"""

from libc.math cimport exp, log, sin, cos, sqrt, fabs, copysign, pow, NAN, INFINITY

BACKEND = "compiled"

cdef double DIRECT_RHO_LIMIT = 300.0

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0


cdef struct Vec3:
    double r
    double t
    double g


cdef struct StepOut:
    double rn
    double tn
    double ds
    double er
    double et
    double es
    Vec3 k


cdef inline Vec3 nan3():
    cdef Vec3 v
    v.r = NAN
    v.t = NAN
    v.g = NAN
    return v


cdef Vec3 direction(int kind, int conv, double orient, double rho, double theta):
    cdef Vec3 out
    cdef double rr_v, rr_d, ex_v, ex_d, eps_v, eps_d, den_v, den_d, a_v, a_d
    cdef double l_v, l_d, p_v, p_d, s_v, s_d, as_v, as_d, g_v, g_d
    cdef double eps0, a0, pt_v, st_d, g_t
    cdef double c0, c1, c2, d1, m1, sh, sphi, den
    cdef double e1, pw1, pw2, dr, dt, mm, mag, norm, scale, lg, sd, drm
    cdef int kth
    if rho != rho or theta != theta:
        return nan3()
    if kind == 1:
        # quadratic bowl: purely radial, |grad| = r
        out.r = orient * 1.0
        out.t = orient * 0.0
        out.g = -rho
        return out
    if rho <= 0.0:
        return nan3()

    # dual pass in rho: a(rho), phi, g
    rr_v = rho * rho
    rr_d = rho * 1.0 + 1.0 * rho
    ex_v = exp(rho * -2.0)
    ex_d = -2.0 * ex_v
    eps_v = rr_v * ex_v
    eps_d = rr_v * ex_d + rr_d * ex_v
    den_v = eps_v + 1.0
    den_d = eps_d
    a_v = rho / den_v
    a_d = (1.0 * den_v - rho * den_d) / (den_v * den_v)
    l_v = log(rho)
    l_d = 1.0 / rho
    p_v = theta - l_v
    p_d = -l_d
    s_v = sin(p_v)
    s_d = p_d * cos(p_v)
    as_v = a_v * s_v
    as_d = a_v * s_d + a_d * s_v
    g_v = 1.0 - as_v
    g_d = -as_d

    # dual pass in theta
    eps0 = rho * rho * exp(-2.0 * rho)
    a0 = rho / (1.0 + eps0)
    pt_v = theta - log(rho)
    st_d = 1.0 * cos(pt_v)
    g_t = -(st_d * a0)

    # terms: fr = c0 + c1 e^-rho + c2 e^-2rho ; dth = d1 e^-kth rho ; mth = m1 e^-rho
    if kind == 0:
        c0 = g_v
        c1 = -g_d
        c2 = 0.0
    else:
        sh = sin(0.5 * p_v)
        sphi = sin(p_v)
        den = eps_v + 1.0
        c0 = 2.0 * sh * sh / den - a_v * sphi
        c1 = a_d * sphi
        c2 = rho * rho / den
    d1 = -g_t
    kth = 1 if conv == 0 else 2
    m1 = g_t

    if rho <= DIRECT_RHO_LIMIT:
        e1 = exp(-rho)
        pw1 = e1
        pw2 = e1 * e1
        scale = 0.0
        if kind == 0:
            dr = 0.0 + c0 * 1.0 + c1 * pw1
        else:
            dr = 0.0 + c0 * 1.0 + c1 * pw1 + c2 * pw2
        dt = 0.0 + d1 * (pw1 if kth == 1 else pw2)
        mm = 0.0 + m1 * pw1
        drm = dr
    else:
        # separate scales for the direction pair and the magnitude pair
        sd = _fr_scale(kind, c0, c1, c2, rho)
        if d1 != 0.0:
            sd = _max(sd, log(fabs(d1)) - kth * rho)
        if sd == -INFINITY:
            sd = 0.0
        dr = _fr_sum(kind, c0, c1, c2, rho, sd)
        dt = 0.0
        if d1 != 0.0:
            dt += copysign(exp(log(fabs(d1)) - kth * rho - sd), d1)
        scale = _fr_scale(kind, c0, c1, c2, rho)
        if m1 != 0.0:
            scale = _max(scale, log(fabs(m1)) - 1 * rho)
        if scale == -INFINITY:
            scale = 0.0
        drm = _fr_sum(kind, c0, c1, c2, rho, scale)
        mm = 0.0
        if m1 != 0.0:
            mm += copysign(exp(log(fabs(m1)) - 1 * rho - scale), m1)

    mag = sqrt(drm * drm + mm * mm)
    norm = sqrt(dr * dr + dt * dt)
    if mag == 0.0 or norm == 0.0:
        return nan3()
    lg = 2.0 * rho + scale + log(mag)
    out.r = orient * (dr / norm)
    out.t = orient * (dt / norm)
    out.g = lg
    return out


cdef inline double _max(double a, double b):
    return a if a >= b else b


cdef inline double _fr_scale(int kind, double c0, double c1, double c2, double rho):
    cdef double m = -INFINITY
    if c0 != 0.0:
        m = _max(m, log(fabs(c0)) - 0 * rho)
    if c1 != 0.0:
        m = _max(m, log(fabs(c1)) - 1 * rho)
    if kind != 0 and c2 != 0.0:
        m = _max(m, log(fabs(c2)) - 2 * rho)
    return m


cdef inline double _fr_sum(int kind, double c0, double c1, double c2, double rho, double m):
    cdef double acc = 0.0
    if c0 != 0.0:
        acc += copysign(exp(log(fabs(c0)) - 0 * rho - m), c0)
    if c1 != 0.0:
        acc += copysign(exp(log(fabs(c1)) - 1 * rho - m), c1)
    if kind != 0 and c2 != 0.0:
        acc += copysign(exp(log(fabs(c2)) - 2 * rho - m), c2)
    return acc


cdef StepOut dp_step(int kind, int conv, double orient, double r0, double t0, Vec3 k1, double h):
    cdef StepOut o
    cdef Vec3 k2, k3, k4, k5, k6, k7
    cdef double r, t, x1, x3, x4, x5, x6, x7
    x1 = exp(-r0)
    r = r0 + h * (A21 * k1.r)
    t = t0 + h * (A21 * k1.t)
    k2 = direction(kind, conv, orient, r, t)
    r = r0 + h * (A31 * k1.r + A32 * k2.r)
    t = t0 + h * (A31 * k1.t + A32 * k2.t)
    k3 = direction(kind, conv, orient, r, t)
    x3 = exp(-r)
    r = r0 + h * (A41 * k1.r + A42 * k2.r + A43 * k3.r)
    t = t0 + h * (A41 * k1.t + A42 * k2.t + A43 * k3.t)
    k4 = direction(kind, conv, orient, r, t)
    x4 = exp(-r)
    r = r0 + h * (A51 * k1.r + A52 * k2.r + A53 * k3.r + A54 * k4.r)
    t = t0 + h * (A51 * k1.t + A52 * k2.t + A53 * k3.t + A54 * k4.t)
    k5 = direction(kind, conv, orient, r, t)
    x5 = exp(-r)
    r = r0 + h * (A61 * k1.r + A62 * k2.r + A63 * k3.r + A64 * k4.r + A65 * k5.r)
    t = t0 + h * (A61 * k1.t + A62 * k2.t + A63 * k3.t + A64 * k4.t + A65 * k5.t)
    k6 = direction(kind, conv, orient, r, t)
    x6 = exp(-r)
    o.rn = r0 + h * (B1 * k1.r + B3 * k3.r + B4 * k4.r + B5 * k5.r + B6 * k6.r)
    o.tn = t0 + h * (B1 * k1.t + B3 * k3.t + B4 * k4.t + B5 * k5.t + B6 * k6.t)
    k7 = direction(kind, conv, orient, o.rn, o.tn)
    x7 = exp(-o.rn)
    o.ds = h * (B1 * x1 + B3 * x3 + B4 * x4 + B5 * x5 + B6 * x6)
    o.er = h * (E1 * k1.r + E3 * k3.r + E4 * k4.r + E5 * k5.r + E6 * k6.r + E7 * k7.r)
    o.et = h * (E1 * k1.t + E3 * k3.t + E4 * k4.t + E5 * k5.t + E6 * k6.t + E7 * k7.t)
    o.es = h * (E1 * x1 + E3 * x3 + E4 * x4 + E5 * x5 + E6 * x6 + E7 * x7)
    o.k = k7
    return o


cdef StepOut rk4_step(int kind, int conv, double orient, double r0, double t0, Vec3 k1, double h):
    cdef StepOut o
    cdef Vec3 k2, k3, k4
    cdef double r, t, x1, x2, x3, x4
    x1 = exp(-r0)
    r = r0 + 0.5 * h * k1.r
    t = t0 + 0.5 * h * k1.t
    k2 = direction(kind, conv, orient, r, t)
    x2 = exp(-r)
    r = r0 + 0.5 * h * k2.r
    t = t0 + 0.5 * h * k2.t
    k3 = direction(kind, conv, orient, r, t)
    x3 = exp(-r)
    r = r0 + h * k3.r
    t = t0 + h * k3.t
    k4 = direction(kind, conv, orient, r, t)
    x4 = exp(-r)
    o.rn = r0 + h * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r) / 6.0
    o.tn = t0 + h * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t) / 6.0
    o.k = direction(kind, conv, orient, o.rn, o.tn)
    o.ds = h * (x1 + 2.0 * x2 + 2.0 * x3 + x4) / 6.0
    o.er = 0.0
    o.et = 0.0
    o.es = 0.0
    return o


cdef inline StepOut do_step(int method, int kind, int conv, double orient,
                            double r0, double t0, Vec3 k1, double h):
    if method == 0:
        return dp_step(kind, conv, orient, r0, t0, k1, h)
    return rk4_step(kind, conv, orient, r0, t0, k1, h)


cdef StepOut refine(int method, int kind, int conv, double orient, double rho, double th,
                    Vec3 k, double h, int which, double target, double s0):
    cdef double lo = 0.0, hi = h, mid, val
    cdef double tol = 1e-13 * _max(1.0, fabs(target))
    cdef StepOut best = do_step(method, kind, conv, orient, rho, th, k, h)
    cdef StepOut res
    cdef int it
    for it in range(100):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        res = do_step(method, kind, conv, orient, rho, th, k, mid)
        val = res.rn if which == 0 else s0 + res.ds
        if val >= target:
            hi = mid
            best = res
            if val - target <= tol:
                break
        else:
            lo = mid
    return best


def direction_sample(int kind, int conv, double orient, double rho, double theta):
    """``(d_rho, d_theta, log_factored_magnitude)``; NaNs where undefined."""
    cdef Vec3 v = direction(kind, conv, orient, rho, theta)
    return v.r, v.t, v.g


def integrate_logpolar(
    int kind, int conv, double orient, double rho0, double theta0, int method,
    double rel_tol, double abs_tol, double h_init, double h_min, double h_max,
    long max_steps, double rho_max, double log_floor, double max_arc,
    double rho_domain_min,
):
    cdef double rho = rho0, th = theta0, s = 0.0, h, err, e1, e2, e3, fac
    cdef long nsteps = 0, nrej = 0
    cdef int status = -1
    cdef Vec3 k
    cdef StepOut o
    S = []
    R = []
    T = []
    G = []

    k = direction(kind, conv, orient, rho, th)
    S.append(s)
    R.append(rho)
    T.append(th)
    G.append(k.g)
    if k.g != k.g or k.g < log_floor:
        return S, R, T, G, 1, 0
    if rho >= rho_max:
        return S, R, T, G, 0, 0
    if max_arc <= 0.0:
        return S, R, T, G, 2, 0

    h = h_init
    while True:
        if nsteps >= max_steps:
            status = 4
            break
        o = do_step(method, kind, conv, orient, rho, th, k, h)
        err = 0.0
        if method == 0:
            e1 = fabs(o.er) / (abs_tol + rel_tol * _max(fabs(rho), fabs(o.rn)))
            e2 = fabs(o.et) / (abs_tol + rel_tol * _max(fabs(th), fabs(o.tn)))
            e3 = fabs(o.es) / (abs_tol + rel_tol * fabs(o.ds))
            err = _max(_max(e1, e2), e3)
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
                    fac = _max(0.2, 0.9 * pow(err, -0.2))
                h = _max(h * fac, h_min)
                continue
        elif not (o.rn == o.rn and o.tn == o.tn and o.k.r == o.k.r):
            status = 5
            break

        nsteps += 1
        if o.rn >= rho_max:
            o = refine(method, kind, conv, orient, rho, th, k, h, 0, rho_max, s)
            status = 0
        elif s + o.ds >= max_arc:
            o = refine(method, kind, conv, orient, rho, th, k, h, 1, max_arc, s)
            status = 2
        rho = o.rn
        th = o.tn
        s = s + o.ds
        k = o.k
        S.append(s)
        R.append(rho)
        T.append(th)
        G.append(k.g)
        if status >= 0:
            break
        if rho < rho_domain_min:
            status = 3
            break
        if k.g < log_floor:
            status = 1
            break
        if method == 0:
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                fac = 5.0 if fac > 5.0 else (0.2 if fac < 0.2 else fac)
            h = h * fac
            if h > h_max:
                h = h_max
    return S, R, T, G, status, nrej
