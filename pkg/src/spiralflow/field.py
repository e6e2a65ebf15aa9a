"""The spiral cost function, its auxiliary expressions and direction fields.

The spiral field is

    f(r, theta) = exp(-1/r) * g(r, theta),
    g = 1 - a(r) * sin(phi),   phi = theta - log(log(1/r)),
    a(r) = L / (1 + r**2 L**2),   L = log(1/r),

on the punctured disk ``0 < r <= 1/2``. Everything that carries the factor
``exp(-1/r)`` is handled as a :class:`SignedLogValue`, and direction fields
cancel that factor analytically so they stay finite for any ``rho = L``.

Three field kinds exist:

``spiral``
    partials of ``f`` by forward-mode differentiation of ``g``.
``paper_displayed_spiral``
    the same ``f`` but with the radial partial assembled from the displayed
    two-line chain (cos-term coefficient ``1/(r**2 L)``). This is a
    different vector field from ``grad f``; it is kept so the two can be
    compared rather than one silently chosen.
``quadratic_bowl``
    ``r**2 / 2``, the radial control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .diffcheck import Dual, exp, log, sin
from .geom import LogPolarPoint, PolarPoint, polar_to_logpolar

# direction-field terms are multiplied out directly below this rho;
# beyond it exp(-2 rho) gets close to underflow and we rescale in log space
_DIRECT_RHO_LIMIT = 300.0


class DomainError(ValueError):
    pass


class CriticalPointError(ArithmeticError):
    """The factored gradient magnitude fell below the requested floor."""


class FieldKind(str, Enum):
    SPIRAL = "spiral"
    QUADRATIC_BOWL = "quadratic_bowl"
    PAPER_DISPLAYED_SPIRAL = "paper_displayed_spiral"


class Convention(str, Enum):
    """Second component of the polar gradient used to build the flow.

    ``euclidean``: coordinate flow of the Euclidean metric,
    ``theta' = -f_theta / r**2``. ``paper``: ``theta' = -f_theta / r``.
    """

    EUCLIDEAN = "euclidean"
    PAPER = "paper"


@dataclass(frozen=True)
class FieldHandle:
    kind: FieldKind
    domain_radius: float

    @classmethod
    def spiral(cls) -> "FieldHandle":
        return cls(FieldKind.SPIRAL, 0.5)

    @classmethod
    def paper_displayed(cls) -> "FieldHandle":
        return cls(FieldKind.PAPER_DISPLAYED_SPIRAL, 0.5)

    @classmethod
    def bowl(cls) -> "FieldHandle":
        return cls(FieldKind.QUADRATIC_BOWL, math.inf)

    @classmethod
    def from_name(cls, name: str) -> "FieldHandle":
        key = name.replace("-", "_")
        table = {
            "spiral": cls.spiral,
            "bowl": cls.bowl,
            "quadratic_bowl": cls.bowl,
            "paper_displayed": cls.paper_displayed,
            "paper_displayed_spiral": cls.paper_displayed,
        }
        if key not in table:
            raise ValueError(f"unknown field kind {name!r}")
        return table[key]()

    @property
    def is_spiral(self) -> bool:
        return self.kind is not FieldKind.QUADRATIC_BOWL

    def check_domain(self, r: float) -> None:
        if not r > 0.0:
            raise DomainError(f"r must be positive, got {r}")
        if r > self.domain_radius:
            raise DomainError(f"r = {r} outside the disk of radius {self.domain_radius}")


@dataclass(frozen=True)
class SignedLogValue:
    """A real number as ``sign * exp(log_magnitude)``; zero is ``(0, -inf)``."""

    sign: int
    log_magnitude: float

    @classmethod
    def from_float(cls, x: float) -> "SignedLogValue":
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_parts(cls, x: float, log_scale: float) -> "SignedLogValue":
        """``x * exp(log_scale)``."""
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)) + log_scale)

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.to_float()

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_magnitude)

    def __mul__(self, other) -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            other = SignedLogValue.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SignedLogValue":
        if not isinstance(other, SignedLogValue):
            other = SignedLogValue.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogValue")
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    def rel_diff(self, other: "SignedLogValue") -> float:
        """``|self/other - 1|`` evaluated without leaving log space."""
        if self.sign == 0 and other.sign == 0:
            return 0.0
        if self.sign != other.sign:
            return math.inf
        return abs(math.expm1(self.log_magnitude - other.log_magnitude))

    def le(self, other: "SignedLogValue", rel_slack: float = 0.0) -> bool:
        """``self <= other + rel_slack * |other|``."""
        if self.sign < other.sign:
            return True
        if self.sign > other.sign:
            if other.sign == 0:
                return False
            # self = 0, other < 0
            return rel_slack >= 1.0
        if self.sign == 0:
            return True
        if self.sign > 0:
            return self.log_magnitude <= other.log_magnitude + math.log1p(rel_slack)
        if rel_slack >= 1.0:
            return True
        return self.log_magnitude >= other.log_magnitude + math.log1p(-rel_slack)

    def to_json(self) -> dict:
        lm = self.log_magnitude
        return {"sign": self.sign, "log_magnitude": lm if math.isfinite(lm) else str(lm)}


@dataclass(frozen=True)
class PolarGradient:
    f_r: SignedLogValue
    f_theta: SignedLogValue


@dataclass(frozen=True)
class DirectionSample:
    """Unit descent direction in the log-polar chart.

    ``(d_rho, d_theta)`` has unit Euclidean length in chart coordinates; the
    chart metric ``exp(-2 rho) (d rho^2 + d theta^2)`` is conformal, so this
    is also the unit direction of the Euclidean metric up to the speed
    factor ``exp(rho)``.
    """

    d_rho: float
    d_theta: float
    log_factored_magnitude: float

    @property
    def factored_magnitude(self) -> float:
        """Gradient norm with ``exp(-1/r)`` divided out (may overflow to inf)."""
        if self.log_factored_magnitude > 709.0:
            return math.inf
        return math.exp(self.log_factored_magnitude)


# -- closed forms written once for floats and duals ---------------------------


def amplitude(r):
    """``a(r) = L / (1 + r**2 L**2)`` with ``L = log(1/r)``."""
    L = -log(r)
    return L / (1.0 + r * r * L * L)


def g_polar(r, theta):
    """The bracket ``1 - a(r) sin(theta - log(log(1/r)))`` of ``f``."""
    L = -log(r)
    return 1.0 - amplitude(r) * sin(theta - log(L))


def f_polar(r, theta):
    """``f`` evaluated directly (underflows for r below ~1/709)."""
    return exp(-1.0 / r) * g_polar(r, theta)


def b_polar(r, theta=0.0):
    L = -log(r)
    return (1.0 / (r * r)) * exp(-1.0 / r) * (L * L / (1.0 + r * r * L * L))


def amplitude_expr(r, theta=0.0):
    return amplitude(r)


def amplitude_logpolar(rho):
    """``a`` as a function of ``rho = log(1/r)``; also returns ``rho**2 r**2``."""
    eps = rho * rho * exp(-2.0 * rho)
    return rho / (1.0 + eps), eps


# -- evaluation ---------------------------------------------------------------


def eval_logpolar(h: FieldHandle, q: LogPolarPoint) -> SignedLogValue:
    if h.kind is FieldKind.QUADRATIC_BOWL:
        return SignedLogValue(1, -2.0 * q.rho - math.log(2.0))
    if q.rho <= 0.0:
        raise DomainError(f"rho = {q.rho} outside the spiral domain")
    a, _ = amplitude_logpolar(q.rho)
    g = 1.0 - a * math.sin(q.theta - math.log(q.rho))
    # -exp(rho) overflows to -inf past rho ~ 709; that is the honest answer
    scale = -math.exp(q.rho) if q.rho < 709.0 else -math.inf
    return SignedLogValue.from_parts(g, scale)


def eval(h: FieldHandle, p: PolarPoint) -> SignedLogValue:  # noqa: A001
    """Value of the field at ``p`` as a signed-log number."""
    h.check_domain(p.r)
    if h.kind is FieldKind.QUADRATIC_BOWL:
        return SignedLogValue.from_float(0.5 * p.r * p.r)
    g = g_polar(p.r, p.theta)
    return SignedLogValue.from_parts(g, -1.0 / p.r)


_PAPER_NAMES = ("a", "b", "fr_on_gamma", "ftheta_on_gamma")


def paper_expr(name: str, r: float):
    """The closed forms displayed alongside the construction.

    ``a`` is returned as a float, the ``exp(-1/r)``-bearing ones as
    :class:`SignedLogValue`.
    """
    if name not in _PAPER_NAMES:
        raise ValueError(f"unknown expression {name!r}; expected one of {_PAPER_NAMES}")
    if not 0.0 < r <= 0.5:
        raise DomainError(f"r = {r} outside (0, 1/2]")
    L = -math.log(r)
    q = 1.0 + r * r * L * L
    if name == "a":
        return L / q
    if name == "b":
        return SignedLogValue(1, 2.0 * L - 1.0 / r + math.log(L * L / q))
    if name == "fr_on_gamma":
        return SignedLogValue(1, -1.0 / r + math.log(L * L / q))
    return SignedLogValue(-1, -1.0 / r + math.log(L / q))


def polar_partials(h: FieldHandle, p: PolarPoint) -> PolarGradient:
    """``(df/dr, df/dtheta)`` in signed-log form.

    For the spiral kinds the derivatives of ``g`` (and of ``a``) come from
    dual numbers; only the outer ``exp(-1/r)`` product rule is written out.
    """
    h.check_domain(p.r)
    r, theta = p.r, p.theta
    if h.kind is FieldKind.QUADRATIC_BOWL:
        return PolarGradient(SignedLogValue.from_float(r), SignedLogValue(0, -math.inf))

    gr = g_polar(Dual(r, 1.0), theta)
    gt = g_polar(r, Dual(theta, 1.0))
    scale = -1.0 / r
    f_theta = SignedLogValue.from_parts(gt.deriv, scale)
    if h.kind is FieldKind.SPIRAL:
        x = gr.value / (r * r) + gr.deriv
    else:
        ad = amplitude(Dual(r, 1.0))
        L = -math.log(r)
        phi = theta - math.log(L)
        x = (
            gr.value / (r * r)
            - ad.deriv * math.sin(phi)
            - ad.value * math.cos(phi) / (r * r * L)
        )
    return PolarGradient(SignedLogValue.from_parts(x, scale), f_theta)


# -- direction field in the log-polar chart ----------------------------------


def spiral_pieces(rho: float, theta: float):
    """Dual passes over ``g(rho, theta)`` shared by both spiral kinds.

    Returns ``(g, g_rho, g_theta, a, a_rho, eps, phi)``. The Cython kernel
    repeats exactly this sequence of operations.
    """
    rd = Dual(rho, 1.0)
    a_d, eps_d = amplitude_logpolar(rd)
    phi_d = theta - log(rd)
    g_d = 1.0 - a_d * sin(phi_d)

    a0, _ = amplitude_logpolar(rho)
    phi_t = Dual(theta, 1.0) - math.log(rho)
    g_t = 1.0 - a0 * sin(phi_t)
    return g_d.value, g_d.deriv, g_t.deriv, a_d.value, a_d.deriv, eps_d.value, phi_d.value


def _direction_terms(kind: FieldKind, convention: Convention, rho: float, theta: float):
    """Components as ``[(coef, k), ...]`` meaning ``sum coef * exp(-k rho)``.

    The whole vector has been divided by ``exp(2 rho)``; ``mag_terms`` give
    ``(F_r, F_theta / r) / exp(2 rho)`` with ``F = partial / exp(-1/r)``.
    """
    g, g_rho, g_theta, a, a_rho, eps, phi = spiral_pieces(rho, theta)
    if kind is FieldKind.SPIRAL:
        fr = ((g, 0), (-g_rho, 1))
    else:
        # 1 - a cos(phi)/L regrouped so that it does not cancel on the curve
        sh = math.sin(0.5 * phi)
        sphi = math.sin(phi)
        den = eps + 1.0
        fr = (
            (2.0 * sh * sh / den - a * sphi, 0),
            (a_rho * sphi, 1),
            (rho * rho / den, 2),
        )
    if convention is Convention.EUCLIDEAN:
        dth = ((-g_theta, 1),)
    else:
        dth = ((-g_theta, 2),)
    return fr, dth, ((g_theta, 1),)


def _sum_terms(groups, rho: float):
    """Evaluate term groups with a common scale; returns (values, log_scale)."""
    if rho <= _DIRECT_RHO_LIMIT:
        e1 = math.exp(-rho)
        pw = (1.0, e1, e1 * e1)
        return [sum(c * pw[k] for c, k in grp) for grp in groups], 0.0
    logs = [math.log(abs(c)) - k * rho for grp in groups for c, k in grp if c != 0.0]
    if not logs:
        return [0.0 for _ in groups], 0.0
    m = max(logs)
    out = []
    for grp in groups:
        acc = 0.0
        for c, k in grp:
            if c != 0.0:
                acc += math.copysign(math.exp(math.log(abs(c)) - k * rho - m), c)
        out.append(acc)
    return out, m


def direction_field(
    h: FieldHandle,
    q: LogPolarPoint,
    convention: Convention | str = Convention.EUCLIDEAN,
    floor: float = 0.0,
) -> DirectionSample:
    """Unit descent direction at ``q`` with ``exp(-1/r)`` cancelled.

    Raises :class:`CriticalPointError` when the factored gradient magnitude
    is below ``floor`` (or exactly zero).
    """
    convention = Convention(convention)
    rho, theta = q.rho, q.theta
    if h.kind is FieldKind.QUADRATIC_BOWL:
        log_mag = -rho
        if floor > 0.0 and log_mag < math.log(floor):
            raise CriticalPointError(f"gradient magnitude below floor at rho={rho}")
        return DirectionSample(1.0, 0.0, log_mag)
    if rho <= 0.0:
        raise DomainError(f"rho = {rho} outside the spiral domain")

    fr, dth, mth = _direction_terms(h.kind, convention, rho, theta)
    if rho <= _DIRECT_RHO_LIMIT:
        (dr, dt, m1), scale = _sum_terms((fr, dth, mth), rho)
        drm = dr
    else:
        # direction and magnitude get separate scales: in the paper
        # convention they differ by a factor exp(rho)
        (dr, dt), _ = _sum_terms((fr, dth), rho)
        (drm, m1), scale = _sum_terms((fr, mth), rho)
    mag = math.sqrt(drm * drm + m1 * m1)
    norm = math.sqrt(dr * dr + dt * dt)
    if mag == 0.0 or norm == 0.0:
        raise CriticalPointError(f"vanishing gradient at rho={rho}, theta={theta}")
    log_mag = 2.0 * rho + scale + math.log(mag)
    if floor > 0.0 and log_mag < math.log(floor):
        raise CriticalPointError(f"gradient magnitude below floor at rho={rho}")
    return DirectionSample(dr / norm, dt / norm, log_mag)


def direction_at_polar(h: FieldHandle, p: PolarPoint, convention=Convention.EUCLIDEAN):
    return direction_field(h, polar_to_logpolar(p), convention)
