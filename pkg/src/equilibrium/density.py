"""Equilibrium densities and edge constants by real quadrature over the support.

    psi(x) = 1/(2 pi^2 x) int (V''(y) y + V'(y)) log|(I+(y) - I-(x)) / (I+(y) - I+(x))| dy
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.conformal.curve import CurveSamples, curve_for, invert
from src.conformal.maps import ConformalMap, critical_points, second_derivative
from src.core.errors import OutOfRange
from src.numerics.precision import QuadratureSpec, equilibrium_quadrature
from src.numerics.quadrature import integrate_interval, integrate_log_singular
from src.potentials.potential import Potential

logger = logging.getLogger(__name__)


def _source(V: Potential, y: float) -> float:
    """V''(y) y + V'(y)."""
    return V.evaluate(y, 2) * y + V.evaluate(y, 1)


def _density(V: Potential, m: ConformalMap, curve: Optional[CurveSamples], x: float,
             spec: QuadratureSpec) -> float:
    curve = curve_for(m, curve)
    lo, hi = curve.left_image, curve.right_image
    if not lo < x < hi:
        raise OutOfRange(f"x={x} outside ({lo}, {hi})")
    i_x, _ = invert(m, curve, x)
    conj_x = i_x.conjugate()

    def integrand(y):
        i_y, _ = invert(m, curve, y)
        num, den = abs(i_y - conj_x), abs(i_y - i_x)
        if den == 0.0:
            return 0.0
        return _source(V, y) * math.log(num / den)

    total = integrate_log_singular(integrand, lo, hi, x, spec)
    return total / (2.0 * math.pi ** 2 * x)


def density_hard(V: Potential, theta: float, c: float, curve: Optional[CurveSamples], x: float,
                 spec: Optional[QuadratureSpec] = None) -> float:
    return _density(V, ConformalMap.hard(theta, c), curve, x, spec or equilibrium_quadrature())


def density_soft(V: Potential, theta: float, c0: float, c1: float, curve: Optional[CurveSamples],
                 x: float, spec: Optional[QuadratureSpec] = None) -> float:
    return _density(V, ConformalMap.soft(theta, c0, c1), curve, x, spec or equilibrium_quadrature())


def edge_constants(V: Potential, theta: float, c: float, curve: Optional[CurveSamples] = None,
                   spec: Optional[QuadratureSpec] = None) -> Tuple[float, float]:
    """(d1, d2) with psi ~ d1 x^{-1/(theta+1)} at 0 and psi ~ d2 (b - x)^{1/2} at b."""
    spec = spec or equilibrium_quadrature()
    m = ConformalMap.hard(theta, c)
    curve = curve_for(m, curve)
    crit = critical_points(m)
    b, s_b = crit.image_b, crit.s_b

    def left(y):
        i_y, _ = invert(m, curve, y)
        return _source(V, y) * (1.0 / (i_y + 1.0)).imag

    def right(y):
        i_y, _ = invert(m, curve, y)
        if i_y == s_b:
            return 0.0
        return _source(V, y) * (1.0 / (i_y - s_b)).imag

    d1 = (-c ** (-theta / (theta + 1.0)) * math.sin(math.pi / (theta + 1.0)) / math.pi ** 2
          * integrate_interval(left, 0.0, b, spec))
    curvature = second_derivative(m, s_b).real
    d2 = -math.sqrt(2.0 / curvature) / (math.pi ** 2 * b) * integrate_interval(right, 0.0, b, spec)
    logger.info("edge constants: d1=%.6g d2=%.6g (c=%.6g)", d1, d2, c)
    return d1, d2


@dataclass
class LogArgumentReport:
    min_ratio: float
    pairs: int

    @property
    def passed(self) -> bool:
        return self.min_ratio > 1.0


def check_log_argument(m: ConformalMap, curve: Optional[CurveSamples],
                       xs: Sequence[float], ys: Sequence[float]) -> LogArgumentReport:
    """Minimum of |I+(y) - I-(x)| / |I+(y) - I+(x)| over sampled pairs; it should exceed 1."""
    curve = curve_for(m, curve)
    inverses = {float(v): invert(m, curve, float(v))[0] for v in np.concatenate([xs, ys])}
    ratios = []
    for x in xs:
        i_x = inverses[float(x)]
        for y in ys:
            if y == x:
                continue
            i_y = inverses[float(y)]
            ratios.append(abs(i_y - i_x.conjugate()) / abs(i_y - i_x))
    return LogArgumentReport(min_ratio=float(min(ratios)), pairs=len(ratios))
