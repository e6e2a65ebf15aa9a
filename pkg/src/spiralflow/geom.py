"""Coordinate charts in the plane: Cartesian, polar and log-polar.

Angles are kept unwrapped (lifted) everywhere; reduction to the principal
branch only happens when converting from Cartesian coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CartesianPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite Cartesian point ({self.x}, {self.y})")


@dataclass(frozen=True)
class PolarPoint:
    """Point with radius ``r > 0`` and unwrapped angle ``theta``."""

    r: float
    theta: float

    def __post_init__(self):
        if not self.r > 0.0:
            raise ValueError(f"radius must be positive, got {self.r}")


@dataclass(frozen=True)
class LogPolarPoint:
    """Point stored as ``rho = log(1/r)`` and unwrapped ``theta``.

    This is the canonical state near the origin: ``r`` underflows long
    before ``rho`` becomes awkward.
    """

    rho: float
    theta: float

    @property
    def r(self) -> float:
        return math.exp(-self.rho)


def to_cartesian(p: PolarPoint) -> CartesianPoint:
    return CartesianPoint(p.r * math.cos(p.theta), p.r * math.sin(p.theta))


def lift_angle(prev_unwrapped: float, new_principal: float) -> float:
    """Return ``new_principal + 2*pi*k`` closest to ``prev_unwrapped``.

    The result differs from ``prev_unwrapped`` by at most pi.
    """
    k = round((prev_unwrapped - new_principal) / TWO_PI)
    out = new_principal + TWO_PI * k
    # round-half-even and rounding in the product can leave us a hair past pi
    d = out - prev_unwrapped
    if d > math.pi:
        out -= TWO_PI
    elif d < -math.pi:
        out += TWO_PI
    return out


def to_polar(c: CartesianPoint, theta_ref: float | None = None) -> PolarPoint:
    """Cartesian to polar; the angle is lifted against ``theta_ref`` if given."""
    r = math.hypot(c.x, c.y)
    th = math.atan2(c.y, c.x)
    if theta_ref is not None:
        th = lift_angle(theta_ref, th)
    return PolarPoint(r, th)


def polar_to_logpolar(p: PolarPoint) -> LogPolarPoint:
    return LogPolarPoint(-math.log(p.r), p.theta)


def logpolar_to_polar(q: LogPolarPoint) -> PolarPoint:
    return PolarPoint(math.exp(-q.rho), q.theta)


def logpolar_to_cartesian(q: LogPolarPoint) -> CartesianPoint:
    r = math.exp(-q.rho)
    return CartesianPoint(r * math.cos(q.theta), r * math.sin(q.theta))


def chord_over_radius(drho: float, dtheta: float) -> float:
    """``|x1 - x0| / r0`` for two log-polar points ``drho, dtheta`` apart.

    Written with ``expm1`` and a half-angle sine so that short chords keep
    full relative precision.
    """
    q = math.exp(-drho)
    u = -math.expm1(-drho) + 2.0 * q * math.sin(0.5 * dtheta) ** 2
    v = q * math.sin(dtheta)
    return math.sqrt(u * u + v * v)
