"""The maps J_c(s) = c (s+1) ((s+1)/s)^{1/theta} (hard edge) and
J~(s) = (c1 s + c0) ((s+1)/s)^{1/theta} (soft edge).

Both use principal logarithms of s+1 and s, which places the cut on
[-1, 0] and gives J ~ c s (resp. c1 s) at infinity. All evaluators accept
scalars or numpy arrays.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.conformal.config import inversionDefaults
from src.core.errors import InvalidConfiguration, OnBranchCut, OutOfRange

logger = logging.getLogger(__name__)

_CUT_DISTANCE = inversionDefaults()["cut_distance"]


class MapKind(str, Enum):
    HARD = "hard"
    SOFT = "soft"


@dataclass(frozen=True)
class ConformalMap:
    theta: float
    kind: MapKind
    c: float = 0.0
    c0: float = 0.0
    c1: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", MapKind(self.kind))
        object.__setattr__(self, "theta", float(self.theta))
        if self.theta < 1:
            raise InvalidConfiguration(f"theta must be >= 1, got {self.theta}")
        if self.kind is MapKind.HARD and not self.c > 0:
            raise InvalidConfiguration(f"hard-edge map needs c > 0, got {self.c}")
        if self.kind is MapKind.SOFT and not self.c0 > self.c1 > 0:
            raise InvalidConfiguration(f"soft-edge map needs c0 > c1 > 0, got ({self.c0}, {self.c1})")

    @classmethod
    def hard(cls, theta: float, c: float) -> "ConformalMap":
        return cls(theta=theta, kind=MapKind.HARD, c=c)

    @classmethod
    def soft(cls, theta: float, c0: float, c1: float) -> "ConformalMap":
        return cls(theta=theta, kind=MapKind.SOFT, c0=c0, c1=c1)

    @property
    def is_hard(self) -> bool:
        return self.kind is MapKind.HARD

    def angle_terms(self) -> Tuple[Tuple[float, float], ...]:
        """(weight, A) pairs with sum weight*arg(A + r e^{i phi}) = phi/theta on the curve."""
        if self.is_hard:
            return ((1.0 + 1.0 / self.theta, 1.0),)
        return ((1.0, self.c0 / self.c1), (1.0 / self.theta, 1.0))

    def parameters(self) -> Tuple[float, float]:
        return (self.c, 0.0) if self.is_hard else (self.c0, self.c1)


@dataclass(frozen=True)
class CriticalData:
    s_b: float
    image_b: float
    s_a: Optional[float] = None
    image_a: Optional[float] = None

    @property
    def left_point(self) -> float:
        return -1.0 if self.s_a is None else self.s_a

    @property
    def left_image(self) -> float:
        return 0.0 if self.image_a is None else self.image_a


def _check_cut(s):
    s = np.asarray(s, dtype=complex)
    on_cut = (np.abs(s.imag) < _CUT_DISTANCE) & (s.real >= -1.0 - _CUT_DISTANCE) & (s.real <= _CUT_DISTANCE)
    if np.any(on_cut):
        raise OnBranchCut(f"s={s[on_cut].ravel()[0]} lies on the cut [-1, 0]")


def log_map(m: ConformalMap, s):
    """A logarithm of J(s); real on the curve where J is positive."""
    if np.ndim(s) == 0:
        s = complex(s)
        branch = (cmath.log(s + 1.0) - cmath.log(s)) / m.theta
        if m.is_hard:
            return math.log(m.c) + cmath.log(s + 1.0) + branch
        return cmath.log(m.c1 * s + m.c0) + branch
    s = np.asarray(s, dtype=complex)
    branch = (np.log(s + 1.0) - np.log(s)) / m.theta
    if m.is_hard:
        return math.log(m.c) + np.log(s + 1.0) + branch
    return np.log(m.c1 * s + m.c0) + branch


def log_derivative(m: ConformalMap, s):
    """J'(s)/J(s)."""
    if np.ndim(s) == 0:
        s = complex(s)
    else:
        s = np.asarray(s, dtype=complex)
    branch = (1.0 / (s + 1.0) - 1.0 / s) / m.theta
    if m.is_hard:
        return 1.0 / (s + 1.0) + branch
    return m.c1 / (m.c1 * s + m.c0) + branch


def _log_second_derivative(m: ConformalMap, s):
    s = np.asarray(s, dtype=complex)
    branch = (-1.0 / (s + 1.0) ** 2 + 1.0 / s ** 2) / m.theta
    if m.is_hard:
        return -1.0 / (s + 1.0) ** 2 + branch
    return -m.c1 ** 2 / (m.c1 * s + m.c0) ** 2 + branch


def _unwrap(value):
    return complex(value) if np.ndim(value) == 0 else value


def map_eval(m: ConformalMap, s, derivative_order: int = 0):
    """J(s) or J'(s) on the principal branch."""
    if derivative_order not in (0, 1):
        raise ValueError(f"derivative_order must be 0 or 1, got {derivative_order}")
    _check_cut(s)
    value = np.exp(log_map(m, s))
    if derivative_order == 1:
        value = value * log_derivative(m, s)
    return _unwrap(value)


def second_derivative(m: ConformalMap, s):
    """J''(s) = J (L^2 + L') with L = J'/J."""
    _check_cut(s)
    lg = log_derivative(m, s)
    return _unwrap(np.exp(log_map(m, s)) * (lg * lg + _log_second_derivative(m, s)))


def critical_points(m: ConformalMap) -> CriticalData:
    theta = m.theta
    if m.is_hard:
        s_b = 1.0 / theta
        b = m.c * (1.0 + theta) ** (1.0 + 1.0 / theta) / theta
        return CriticalData(s_b=s_b, image_b=b)
    root = math.sqrt(4.0 * m.c0 * m.c1 * theta + m.c1 ** 2 * (theta - 1.0) ** 2) / (2.0 * theta * m.c1)
    centre = -(theta - 1.0) / (2.0 * theta)
    s_a, s_b = centre - root, centre + root
    return CriticalData(s_b=s_b, image_b=map_eval(m, s_b).real,
                        s_a=s_a, image_a=map_eval(m, s_a).real)


def hard_edge_endpoint(theta: float, c: float) -> float:
    """b = c (1+theta)^{1+1/theta} / theta."""
    return c * (1.0 + theta) ** (1.0 + 1.0 / theta) / theta


def cardano_invert(c: float, x: float) -> Tuple[complex, complex]:
    """Closed-form preimages of x under the theta = 2 hard-edge map.

    Roots of s^3 + 3 s^2 + (3 - x^2/c^2) s + 1 = 0 on the curve; I_plus is the
    one in the upper half plane.
    """
    b = 3.0 * math.sqrt(3.0) * c / 2.0
    if not 0.0 < x <= b * (1.0 + 1e-15):
        raise OutOfRange(f"x={x} outside (0, {b}]")
    disc = math.sqrt(max(0.0, 1.0 - 4.0 * x * x / (27.0 * c * c)))
    chi_plus, chi_minus = np.cbrt(1.0 + disc), np.cbrt(1.0 - disc)
    u = complex(0.5, math.sqrt(3.0) / 2.0)
    scale = x ** (2.0 / 3.0) / (2.0 ** (1.0 / 3.0) * c ** (2.0 / 3.0))
    i_plus = scale * (u * chi_plus + u.conjugate() * chi_minus) - 1.0
    return i_plus, i_plus.conjugate()
