"""Derivative oracles: forward-mode dual numbers and Richardson-extrapolated
central differences.

Expressions are plain callables ``expr(r, theta)``. Writing them with the
elementary functions of this module (``exp``, ``log``, ``sin`` ...) lets the
same code run on floats and on :class:`Dual` numbers.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Union

from .geom import PolarPoint

Number = Union[float, "Dual"]


@dataclass(frozen=True, slots=True)
class Dual:
    """``value + deriv * eps`` with ``eps**2 == 0``."""

    value: float
    deriv: float = 0.0

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.deriv + other.deriv)
        return Dual(self.value + other, self.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.deriv - other.deriv)
        return Dual(self.value - other, self.deriv)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.deriv)

    def __neg__(self):
        return Dual(-self.value, -self.deriv)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                self.value * other.deriv + self.deriv * other.value,
            )
        return Dual(self.value * other, self.deriv * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value / other.value,
                (self.deriv * other.value - self.value * other.deriv)
                / (other.value * other.value),
            )
        return Dual(self.value / other, self.deriv / other)

    def __rtruediv__(self, other):
        # other / self with other constant
        return Dual(other / self.value, -other * self.deriv / (self.value * self.value))

    def __pow__(self, n):
        if isinstance(n, Dual):
            return exp(n * log(self))
        if n == 2:
            return self * self
        return Dual(self.value**n, n * self.value ** (n - 1) * self.deriv)

    def __rpow__(self, base):
        return exp(self * math.log(base))


def exp(x: Number) -> Number:
    if isinstance(x, Dual):
        e = math.exp(x.value)
        return Dual(e, x.deriv * e)
    return math.exp(x)


def log(x: Number) -> Number:
    if isinstance(x, Dual):
        return Dual(math.log(x.value), x.deriv / x.value)
    return math.log(x)


def sin(x: Number) -> Number:
    if isinstance(x, Dual):
        return Dual(math.sin(x.value), x.deriv * math.cos(x.value))
    return math.sin(x)


def cos(x: Number) -> Number:
    if isinstance(x, Dual):
        return Dual(math.cos(x.value), -x.deriv * math.sin(x.value))
    return math.cos(x)


def sqrt(x: Number) -> Number:
    if isinstance(x, Dual):
        s = math.sqrt(x.value)
        return Dual(s, x.deriv / (2.0 * s))
    return math.sqrt(x)


Expr = Callable[[Number, Number], Number]


def _seed(p: PolarPoint, which: str) -> tuple[Dual, Dual]:
    if which == "r":
        return Dual(p.r, 1.0), Dual(p.theta, 0.0)
    if which == "theta":
        return Dual(p.r, 0.0), Dual(p.theta, 1.0)
    raise ValueError(f"which must be 'r' or 'theta', got {which!r}")


def dual_value_and_partial(expr: Expr, p: PolarPoint, which: str) -> tuple[float, float]:
    out = expr(*_seed(p, which))
    if isinstance(out, Dual):
        return out.value, out.deriv
    return float(out), 0.0


def dual_partial(expr: Expr, p: PolarPoint, which: str) -> float:
    """Exact (to rounding) partial derivative of ``expr`` at ``p``."""
    return dual_value_and_partial(expr, p, which)[1]


class StepUnderflowError(ArithmeticError):
    pass


def fd_partial(
    expr: Expr, p: PolarPoint, which: str, h0: float = 1e-5
) -> tuple[float, float]:
    """Central differences at ``h0`` and ``h0/2`` combined by Richardson.

    Returns ``(estimate, error_estimate)`` where the error estimate is the
    size of the Richardson correction.
    """
    x0 = p.r if which == "r" else p.theta
    if which not in ("r", "theta"):
        raise ValueError(f"which must be 'r' or 'theta', got {which!r}")
    if h0 <= 64.0 * math.ulp(max(abs(x0), 1.0)):
        raise StepUnderflowError(f"step {h0} too small at coordinate {x0}")

    def at(x):
        if which == "r":
            return float(expr(x, p.theta))
        return float(expr(p.r, x))

    def central(h):
        return (at(x0 + h) - at(x0 - h)) / (2.0 * h)

    d1 = central(h0)
    d2 = central(0.5 * h0)
    est = d2 + (d2 - d1) / 3.0
    return est, abs(d2 - d1) / 3.0


def agree(a: float, b: float, rel: float = 1e-6, abs_: float = 1e-9) -> bool:
    """``|a - b| <= max(rel * max(|a|, |b|), abs_)``."""
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), abs_)


def sample_annulus(n: int, seed: int, r_lo: float = 0.05, r_hi: float = 0.5) -> list[PolarPoint]:
    """``n`` reproducible points with ``r`` in ``[r_lo, r_hi]`` and any angle."""
    rng = random.Random(seed)
    return [PolarPoint(rng.uniform(r_lo, r_hi), rng.uniform(-math.pi, math.pi)) for _ in range(n)]


def agreement_table(
    exprs: dict[str, Expr],
    points: list[PolarPoint],
    h0: float = 1e-5,
    rel: float = 1e-6,
    abs_: float = 1e-9,
) -> list[dict]:
    """Dual vs finite-difference partials for every expression, point and variable."""
    rows = []
    for name, expr in exprs.items():
        for p in points:
            for which in ("r", "theta"):
                d = dual_partial(expr, p, which)
                fd, fd_err = fd_partial(expr, p, which, h0)
                rows.append(
                    {
                        "expr": name, "which": which, "r": p.r, "theta": p.theta,
                        "dual": d, "fd": fd, "fd_error": fd_err,
                        "agree": agree(d, fd, rel, abs_),
                    }
                )
    return rows
