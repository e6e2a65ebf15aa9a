from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..field import FieldKind, SignedLogValue
from ..geom import LogPolarPoint


class Method(str, Enum):
    RK45_ADAPTIVE = "rk45_adaptive"
    RK4_FIXED = "rk4_fixed"


class TrajectoryConvention(str, Enum):
    CARTESIAN_EUCLIDEAN = "cartesian_euclidean"
    POLAR_EUCLIDEAN = "polar_euclidean"
    POLAR_PAPER = "polar_paper"

    @classmethod
    def from_name(cls, name: str) -> "TrajectoryConvention":
        return cls(name.replace("-", "_"))


class StopReason(str, Enum):
    RHO_MAX = "rho_max"
    CRITICAL_POINT = "critical_point"
    MAX_ARCLENGTH = "max_arclength"
    DOMAIN_EXIT = "domain_exit"
    MAX_STEPS = "max_steps"
    STEP_UNDERFLOW = "step_underflow"


# integer codes shared with the compiled kernel
STATUS_CODES = {
    0: StopReason.RHO_MAX,
    1: StopReason.CRITICAL_POINT,
    2: StopReason.MAX_ARCLENGTH,
    3: StopReason.DOMAIN_EXIT,
    4: StopReason.MAX_STEPS,
    5: StopReason.STEP_UNDERFLOW,
}


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepping parameters.

    Step sizes are in the integration chart's own arc length: ``s`` for the
    Cartesian chart, ``sqrt(d rho^2 + d theta^2)`` for the log-polar one.
    """

    method: Method = Method.RK45_ADAPTIVE
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-6
    h_max: float = 0.5
    max_steps: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass(frozen=True)
class StopCondition:
    rho_max: float = 20.0
    grad_floor: float = 1e-300
    max_arclength: float = math.inf
    domain_exit: bool = True

    def __post_init__(self):
        if (
            not math.isfinite(self.rho_max)
            and self.grad_floor <= 0
            and not math.isfinite(self.max_arclength)
            and not self.domain_exit
        ):
            raise ValueError("at least one stop condition must be set")


@dataclass(frozen=True)
class TrajectorySample:
    s: float
    q: LogPolarPoint
    f_value: SignedLogValue
    factored_grad_magnitude: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of an integrated flow, stored column-wise.

    ``grad_log`` is the log of the factored gradient magnitude; ``f_sign``
    and ``f_log`` hold the field value in signed-log form.
    """

    s: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    f_sign: np.ndarray
    f_log: np.ndarray
    grad_log: np.ndarray
    stop_reason: StopReason
    convention: TrajectoryConvention
    field_kind: FieldKind
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.s)

    @property
    def r(self) -> np.ndarray:
        return np.exp(-self.rho)

    @property
    def x(self) -> np.ndarray:
        return self.r * np.cos(self.theta)

    @property
    def y(self) -> np.ndarray:
        return self.r * np.sin(self.theta)

    @property
    def samples(self) -> list[TrajectorySample]:
        out = []
        for i in range(len(self.s)):
            gl = float(self.grad_log[i])
            out.append(
                TrajectorySample(
                    float(self.s[i]),
                    LogPolarPoint(float(self.rho[i]), float(self.theta[i])),
                    SignedLogValue(int(self.f_sign[i]), float(self.f_log[i])),
                    math.exp(gl) if gl < 709.0 else math.inf,
                )
            )
        return out

    @property
    def final(self) -> LogPolarPoint:
        return LogPolarPoint(float(self.rho[-1]), float(self.theta[-1]))

    def f_values(self) -> list[SignedLogValue]:
        return [SignedLogValue(int(a), float(b)) for a, b in zip(self.f_sign, self.f_log)]


class IntegrationError(RuntimeError):
    """Integration failed; ``trajectory`` holds everything accepted so far."""

    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory
