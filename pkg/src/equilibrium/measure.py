"""The equilibrium measure and an edge-adapted interpolant of its density.

The support [left, right] is split at its midpoint. On each half psi(x) dx is
pulled back to u in [0, 1] by a map that absorbs the edge behavior:

    hard left edge   x = mid * u^{(theta+1)/theta}
    soft left edge   x = left + (mid - left) u^2
    right edge       x = right - (right - mid) u^2

so that h(u) = psi(x(u)) x'(u) is smooth and Chebyshev interpolation of h
gives mass, CDF and cheap density values.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev

from src.conformal.curve import CurveSamples
from src.conformal.maps import ConformalMap
from src.core.errors import OutOfRange
from src.equilibrium.config import eulerLagrangeDefaults, massDensityDefaults
from src.numerics.precision import equilibrium_quadrature
from src.numerics.quadrature import integrate_log_singular
from src.numerics.roots import find_root_monotone
from src.potentials.potential import Potential

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    HARD_EDGE = "hard"
    SOFT_EDGE = "soft"
    CRITICAL_EDGE = "critical"


# ============================================================================
# EDGE-ADAPTED INTERPOLANT
# ============================================================================

@dataclass(frozen=True)
class _Piece:
    """One half of the support pulled back to u in [0, 1]; u = 0 is the outer edge."""
    edge: float
    mid: float
    power: float
    h: Chebyshev
    cumulative: Chebyshev

    def x(self, u):
        return self.edge + (self.mid - self.edge) * np.asarray(u) ** self.power

    def dx(self, u):
        return abs(self.mid - self.edge) * self.power * np.asarray(u) ** (self.power - 1.0)

    def u(self, x: float) -> float:
        t = (x - self.edge) / (self.mid - self.edge)
        return min(1.0, max(0.0, t)) ** (1.0 / self.power)

    @property
    def mass(self) -> float:
        return float(self.cumulative(1.0))


def _build_piece(psi: Callable[[float], float], edge: float, mid: float, power: float,
                 degree: int) -> _Piece:
    scale = abs(mid - edge) * power

    def h(us):
        return np.array([psi(float(x)) * scale * u ** (power - 1.0)
                         for u, x in zip(us, edge + (mid - edge) * us ** power)])

    poly = Chebyshev.interpolate(h, degree, domain=[0.0, 1.0])
    return _Piece(edge=edge, mid=mid, power=power, h=poly, cumulative=poly.integ(lbnd=0.0))


@dataclass(frozen=True)
class MassDensity:
    left: float
    right: float
    left_piece: _Piece
    right_piece: _Piece
    psi_exact: Callable[[float], float] = field(compare=False, repr=False)

    @classmethod
    def build(cls, psi: Callable[[float], float], left: float, right: float, theta: float,
              hard_left: bool, degree: int = massDensityDefaults()["degree"]) -> "MassDensity":
        if not left < right:
            raise OutOfRange(f"empty support [{left}, {right}]")
        mid = 0.5 * (left + right)
        left_power = (theta + 1.0) / theta if hard_left else 2.0
        return cls(left=left, right=right,
                   left_piece=_build_piece(psi, left, mid, left_power, degree),
                   right_piece=_build_piece(psi, right, mid, 2.0, degree),
                   psi_exact=psi)

    @property
    def midpoint(self) -> float:
        return self.left_piece.mid

    @property
    def total_mass(self) -> float:
        return self.left_piece.mass + self.right_piece.mass

    def _piece(self, x: float) -> _Piece:
        return self.left_piece if x <= self.midpoint else self.right_piece

    def __call__(self, x: float) -> float:
        if not self.left < x < self.right:
            return 0.0
        piece = self._piece(x)
        u = piece.u(x)
        jac = float(piece.dx(u))
        if u < 1e-3 or jac == 0.0:
            return self.psi_exact(x)
        return float(piece.h(u)) / jac

    def cdf(self, x: float) -> float:
        if x <= self.left:
            return 0.0
        if x >= self.right:
            return self.total_mass
        if x <= self.midpoint:
            return float(self.left_piece.cumulative(self.left_piece.u(x)))
        return self.total_mass - float(self.right_piece.cumulative(self.right_piece.u(x)))

    def cdf_array(self, xs) -> np.ndarray:
        """Normalized CDF on an array."""
        xs = np.clip(np.atleast_1d(np.asarray(xs, dtype=float)), self.left, self.right)
        left, right = self.left_piece, self.right_piece
        on_left = xs <= self.midpoint
        u_left = np.clip((xs - left.edge) / (left.mid - left.edge), 0.0, 1.0) ** (1.0 / left.power)
        u_right = np.clip((xs - right.edge) / (right.mid - right.edge), 0.0, 1.0) ** (1.0 / right.power)
        values = np.where(on_left, left.cumulative(u_left), self.total_mass - right.cumulative(u_right))
        return values / self.total_mass

    def sample(self, count: int, rng: np.random.Generator, table_size: int = 1 << 14) -> np.ndarray:
        """Inverse-CDF draws through a dense monotone table of the interpolant."""
        us = np.linspace(0.0, 1.0, table_size)
        xs = np.concatenate([self.left_piece.x(us), self.right_piece.x(us[::-1])[1:]])
        levels = np.maximum.accumulate(self.cdf_array(xs))
        return np.interp(rng.uniform(0.0, 1.0, count), levels, xs)

    def quantile(self, p: float) -> float:
        """x with normalized CDF equal to p."""
        target = p * self.total_mass
        first = self.left_piece.mass
        if target <= first:
            piece, level = self.left_piece, target
        else:
            piece, level = self.right_piece, self.total_mass - target
        u = find_root_monotone(lambda v: float(piece.cumulative(v)) - level, 0.0, 1.0,
                               tol=1e-10 * max(1.0, self.total_mass))
        return float(piece.x(u))

    def integrate(self, f: Callable[[float], float], x0: Optional[float] = None) -> float:
        """int f(x) psi(x) dx, with a log-type singularity of f allowed at x0."""
        spec = replace(equilibrium_quadrature(), abs_tol=1e-11, rel_tol=1e-10)
        total = 0.0
        for piece in (self.left_piece, self.right_piece):
            def g(u, piece=piece):
                return f(float(piece.x(u))) * float(piece.h(u))
            singular = 0.5
            if x0 is not None and min(piece.edge, piece.mid) < x0 < max(piece.edge, piece.mid):
                singular = piece.u(x0)
            total += integrate_log_singular(g, 0.0, 1.0, singular, spec)
        return total


# ============================================================================
# MEASURE
# ============================================================================

@dataclass
class EquilibriumMeasure:
    theta: float
    potential: Potential
    regime: Regime
    support: Tuple[float, float]
    map: ConformalMap
    curve: CurveSamples
    density: MassDensity
    edge_constants: Optional[Tuple[float, float]] = None
    lagrange_ell: Optional[float] = None

    def __post_init__(self):
        left, right = self.support
        if not 0.0 <= left < right:
            raise OutOfRange(f"invalid support {self.support}")

    def psi(self, x: float) -> float:
        return self.density(x)

    def psi_grid(self, count: int) -> List[Tuple[float, float]]:
        left, right = self.support
        xs = left + (right - left) * (np.arange(count) + 0.5) / count
        return [(float(x), self.psi(float(x))) for x in xs]

    def summary(self) -> dict:
        d1, d2 = self.edge_constants or (None, None)
        c_or_c0, c1 = self.map.parameters()
        return {
            "regime": self.regime.value,
            "a": self.support[0],
            "b": self.support[1],
            "c_or_c0": c_or_c0,
            "c1": c1 if not self.map.is_hard else None,
            "d1": d1,
            "d2": d2,
            "ell": self.lagrange_ell,
        }


def total_mass(measure: EquilibriumMeasure) -> float:
    return measure.density.total_mass


def sample_measure(measure: EquilibriumMeasure, count: int, rng: np.random.Generator) -> np.ndarray:
    """Independent draws from the equilibrium measure by inverse CDF."""
    return measure.density.sample(count, rng)


# ============================================================================
# EULER-LAGRANGE CONDITIONS
# ============================================================================

@dataclass
class EulerLagrangeReport:
    max_dev_on_support: float
    min_slack_off_support: float
    ell_estimate: float
    values_in: Tuple[float, ...] = ()
    values_out: Tuple[float, ...] = ()


def lagrange_function(measure: EquilibriumMeasure, x: float) -> float:
    """L(x) = int log|x - y| dmu + int log|x^theta - y^theta| dmu - V(x)."""
    theta = measure.theta
    x_theta = x ** theta

    def kernel(y):
        gap, gap_theta = abs(x - y), abs(x_theta - y ** theta)
        if gap == 0.0 or gap_theta == 0.0:
            return 0.0
        return math.log(gap) + math.log(gap_theta)

    return measure.density.integrate(kernel, x0=x) - measure.potential.evaluate(x)


def verify_euler_lagrange(measure: EquilibriumMeasure, grid_in: Sequence[float],
                          grid_out: Sequence[float]) -> EulerLagrangeReport:
    values_in = [lagrange_function(measure, float(x)) for x in grid_in]
    values_out = [lagrange_function(measure, float(x)) for x in grid_out]
    ell = float(np.median(values_in))
    max_dev = float(max(abs(v - ell) for v in values_in))
    min_slack = float(min(ell - v for v in values_out)) if values_out else float("inf")
    measure.lagrange_ell = ell
    logger.info("Euler-Lagrange: ell=%.10g max deviation %.3g, min slack %.3g", ell, max_dev, min_slack)
    return EulerLagrangeReport(max_dev_on_support=max_dev, min_slack_off_support=min_slack,
                               ell_estimate=ell, values_in=tuple(values_in),
                               values_out=tuple(values_out))


def euler_lagrange_grids(measure: EquilibriumMeasure, interior_points: Optional[int] = None):
    """Midpoint grid on the support and exterior probes beyond b (and inside (0, a))."""
    d = eulerLagrangeDefaults()
    count = d["interior_points"] if interior_points is None else interior_points
    left, right = measure.support
    grid_in = left + (right - left) * (np.arange(count) + 0.5) / count
    grid_out = [right * f for f in d["exterior_factors"]]
    if left > 0.0:
        grid_out.append(0.5 * left)
    return grid_in, np.array(grid_out)
