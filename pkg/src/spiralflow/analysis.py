"""Geometry of sampled paths: arc length, length-distance ratio, secants.

Everything works on log-polar samples ``(rho, theta)`` so that paths
reaching far below floating-point range (closed-form spiral samples, deep
integrations) are handled without underflow. Both integrated
:class:`~spiralflow.flow.Trajectory` objects and closed-form samples go
through :class:`PathSamples`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import secant_angle_closed_form
from .geom import TWO_PI, CartesianPoint, lift_angle

ORIGIN = CartesianPoint(0.0, 0.0)
DEFAULT_WINDOW = 0.1
DEFAULT_TANGENT_THRESHOLD = 1e-2


@dataclass(frozen=True, eq=False)
class PathSamples:
    """Ordered samples ``(rho, theta)``; ``s`` is cumulative arc length or None."""

    rho: np.ndarray
    theta: np.ndarray
    s: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.s is not None:
            object.__setattr__(self, "s", np.asarray(self.s, dtype=float))
        if self.rho.shape != self.theta.shape or self.rho.ndim != 1:
            raise ValueError("rho and theta must be 1-D arrays of equal length")

    def __len__(self) -> int:
        return len(self.rho)

    @classmethod
    def from_polar(cls, r, theta, s=None) -> "PathSamples":
        return cls(-np.log(np.asarray(r, dtype=float)), theta, s)

    @classmethod
    def from_cartesian(cls, x, y, s=None) -> "PathSamples":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        th = np.arctan2(y, x)
        lifted = [float(th[0])]
        for v in th[1:]:
            lifted.append(lift_angle(lifted[-1], float(v)))
        return cls(-np.log(np.hypot(x, y)), np.array(lifted), s)

    @property
    def r(self) -> np.ndarray:
        return np.exp(-self.rho)


def as_path(obj) -> PathSamples:
    if isinstance(obj, PathSamples):
        return obj
    return PathSamples(obj.rho, obj.theta, getattr(obj, "s", None))


def gamma_samples(rho_t: np.ndarray) -> PathSamples:
    """Closed-form spiral samples at ``t = exp(rho_t)``."""
    rho_t = np.asarray(rho_t, dtype=float)
    return PathSamples(rho_t, np.array([secant_angle_closed_form(v) for v in rho_t]))


def chord_lengths(path) -> np.ndarray:
    """Euclidean distances between consecutive samples."""
    p = as_path(path)
    drho = np.diff(p.rho)
    dth = np.diff(p.theta)
    q = np.exp(-drho)
    u = -np.expm1(-drho) + 2.0 * q * np.sin(0.5 * dth) ** 2
    v = q * np.sin(dth)
    return np.exp(-p.rho[:-1]) * np.sqrt(u * u + v * v)


def arclength_series(path) -> tuple[np.ndarray, np.ndarray]:
    """``(s, cumulative chord length)``; the last entry is the total length."""
    p = as_path(path)
    if len(p) < 2:
        raise ValueError("need at least two samples")
    cum = np.concatenate([[0.0], np.cumsum(chord_lengths(p))])
    s = p.s if p.s is not None else cum
    return s, cum


@dataclass(frozen=True, eq=False)
class LengthDistance:
    s: np.ndarray
    ratio: np.ndarray
    skipped: np.ndarray  # True where the sample sits on the limit
    terminal_gap: float


def _is_origin(limit: CartesianPoint) -> bool:
    return limit.x == 0.0 and limit.y == 0.0


def length_distance_series(path, limit: CartesianPoint = ORIGIN) -> LengthDistance:
    """Remaining arc length over distance to ``limit`` at each sample.

    The remaining length after the last sample is taken as the straight
    gap to the limit, the shortest possible tail.
    """
    p = as_path(path)
    s, _ = arclength_series(p)
    n = len(p)
    if _is_origin(limit):
        # R_i = sigma_i / r_i via R_i = c_i / r_i + (r_{i+1} / r_i) R_{i+1};
        # never forms r itself, so it works at any depth
        drho = np.diff(p.rho)
        dth = np.diff(p.theta)
        q = np.exp(-drho)
        u = -np.expm1(-drho) + 2.0 * q * np.sin(0.5 * dth) ** 2
        v = q * np.sin(dth)
        c_over_r = np.sqrt(u * u + v * v)
        ratio = np.empty(n)
        ratio[-1] = 1.0
        for i in range(n - 2, -1, -1):
            ratio[i] = c_over_r[i] + q[i] * ratio[i + 1]
        return LengthDistance(s, ratio, np.zeros(n, dtype=bool), math.exp(-p.rho[-1]))

    r = p.r
    x = r * np.cos(p.theta) - limit.x
    y = r * np.sin(p.theta) - limit.y
    dist = np.hypot(x, y)
    chords = chord_lengths(p)
    gap = float(dist[-1])
    remaining = np.concatenate([np.cumsum(chords[::-1])[::-1], [0.0]]) + gap
    skipped = dist == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(skipped, np.nan, remaining / np.where(skipped, 1.0, dist))
    return LengthDistance(s, ratio, skipped, gap)


@dataclass(frozen=True, eq=False)
class SecantSeries:
    s: np.ndarray
    angle: np.ndarray  # unwrapped secant angle
    distance_to_limit: np.ndarray

    def entries(self) -> list[tuple[float, float, float]]:
        return list(zip(self.s.tolist(), self.angle.tolist(), self.distance_to_limit.tolist()))


def secant_series(path, limit: CartesianPoint = ORIGIN) -> SecantSeries:
    p = as_path(path)
    s, _ = arclength_series(p) if len(p) > 1 else (np.zeros(1), None)
    if _is_origin(limit):
        # the secant from the origin points along the sample's own angle
        return SecantSeries(s, p.theta.copy(), p.r)
    r = p.r
    x = r * np.cos(p.theta) - limit.x
    y = r * np.sin(p.theta) - limit.y
    raw = np.arctan2(y, x)
    ang = np.empty_like(raw)
    ang[0] = raw[0]
    for i in range(1, len(raw)):
        ang[i] = lift_angle(ang[i - 1], float(raw[i]))
    return SecantSeries(s, ang, np.hypot(x, y))


@dataclass(frozen=True, eq=False)
class GeometryReport:
    total_length: float
    ratio_series: list[tuple[float, float]]
    winding_count: float
    oscillation: float
    tangent_exists: bool
    terminal_gap: float
    window_fraction: float = DEFAULT_WINDOW
    tangent_threshold: float = DEFAULT_TANGENT_THRESHOLD
    extras: dict = field(default_factory=dict)

    @property
    def terminal_gap_fraction(self) -> float:
        if self.total_length == 0.0:
            return math.inf if self.terminal_gap > 0 else 0.0
        return self.terminal_gap / self.total_length

    def to_json(self, max_series: int | None = None) -> dict:
        series = self.ratio_series
        if max_series is not None and len(series) > max_series:
            idx = np.unique(np.linspace(0, len(series) - 1, max_series).round().astype(int))
            series = [series[i] for i in idx]
        return {
            "total_length": self.total_length,
            "winding_count": self.winding_count,
            "oscillation": self.oscillation,
            "tangent_exists": self.tangent_exists,
            "terminal_gap": self.terminal_gap,
            "terminal_gap_fraction": self.terminal_gap_fraction,
            "window_fraction": self.window_fraction,
            "tangent_threshold": self.tangent_threshold,
            "ratio_series": [[a, b] for a, b in series],
            **self.extras,
        }


def geometry_report(
    path,
    limit: CartesianPoint = ORIGIN,
    window: float = DEFAULT_WINDOW,
    threshold: float = DEFAULT_TANGENT_THRESHOLD,
) -> GeometryReport:
    """Length, ratio series, winding and the finite-data tangent verdict.

    ``oscillation`` is sup minus inf of the secant angle over the trailing
    ``window`` fraction of arc length; a tangent is declared to exist when
    it is below ``threshold`` radians.
    """
    p = as_path(path)
    _, cum = arclength_series(p)
    ld = length_distance_series(p, limit)
    sec = secant_series(p, limit)
    s0, s1 = float(sec.s[0]), float(sec.s[-1])
    tail = sec.s >= s1 - window * (s1 - s0)
    osc = float(np.max(sec.angle[tail]) - np.min(sec.angle[tail]))
    keep = ~ld.skipped
    return GeometryReport(
        total_length=float(cum[-1]),
        ratio_series=list(zip(ld.s[keep].tolist(), ld.ratio[keep].tolist())),
        winding_count=float(sec.angle[-1] - sec.angle[0]) / TWO_PI,
        oscillation=osc,
        tangent_exists=osc < threshold,
        terminal_gap=ld.terminal_gap,
        window_fraction=window,
        tangent_threshold=threshold,
    )


def on_curve_residual(path) -> np.ndarray:
    """``|theta - log(rho)|``: zero exactly on the spiral (same winding)."""
    p = as_path(path)
    return np.abs(p.theta - np.log(p.rho))


def descent_violations(traj, rel_slack: float) -> int:
    """Steps where ``f`` grows by more than ``rel_slack * |f|`` (signed-log compare)."""
    from .field import SignedLogValue

    vals = [SignedLogValue(int(s), float(l)) for s, l in zip(traj.f_sign, traj.f_log)]
    return sum(1 for a, b in zip(vals, vals[1:]) if not b.le(a, rel_slack))


def simulation_report(traj, rel_tol: float, limit: CartesianPoint = ORIGIN) -> dict:
    """GeometryReport of a run plus the descent check and on-curve residuals."""
    rep = geometry_report(traj, limit).to_json()
    resid = on_curve_residual(traj)
    rep.update(
        {
            "stop_reason": traj.stop_reason.value,
            "field": traj.field_kind.value,
            "convention": traj.convention.value,
            "n_samples": len(traj),
            "descent_slack": 10.0 * rel_tol,
            "descent_violations": descent_violations(traj, 10.0 * rel_tol),
            "on_curve_residual": resid.tolist(),
            "on_curve_residual_max": float(np.max(resid)),
        }
    )
    return rep
