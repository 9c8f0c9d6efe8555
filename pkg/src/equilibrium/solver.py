"""Map parameters from the contour conditions N(0) = theta (and N(-1) = 0 soft)."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.conformal.curve import contour_integral
from src.conformal.maps import ConformalMap, critical_points, map_eval
from src.core.errors import InvalidSolution, NoConvergence
from src.equilibrium.config import equilibriumDefaults
from src.numerics.roots import find_root_monotone, solve_2d
from src.potentials.potential import Potential

logger = logging.getLogger(__name__)

_DEFAULTS = equilibriumDefaults()


def field_integrand(V: Potential, m: ConformalMap, pole: float) -> Callable:
    """s -> V'(J(s)) J(s) / (s - pole) on arrays of curve points."""
    def g(s):
        j = map_eval(m, s)
        return V.evaluate(j, 1) * j / (s - pole)
    return g


def hard_condition(V: Potential, theta: float, c: float) -> float:
    """f(c) = (1/2 pi i) oint V'(J_c) J_c / s ds; the solution has f(c) = 1 + theta."""
    m = ConformalMap.hard(theta, c)
    return contour_integral(m, field_integrand(V, m, 0.0)).real


def solve_c(V: Potential, theta: float) -> float:
    target = 1.0 + theta
    lo, hi = _DEFAULTS["c_bracket"]
    c = find_root_monotone(lambda c: hard_condition(V, theta, c) - target, lo, hi,
                           tol=_DEFAULTS["solve_tol"])
    logger.info("hard-edge parameter c = %.15g (theta=%g)", c, theta)
    return c


@dataclass
class MonotonicityReport:
    cs: Tuple[float, ...]
    values: Tuple[float, ...]
    increasing: bool


def c_monotonicity_check(V: Potential, theta: float, cs: Optional[Sequence[float]] = None) -> MonotonicityReport:
    """Sample f(c) on a grid and confirm it increases."""
    cs = np.geomspace(1e-3, 10.0, 25) if cs is None else np.asarray(cs, dtype=float)
    values = [hard_condition(V, theta, float(c)) for c in cs]
    increasing = bool(np.all(np.diff(values) > 0.0))
    if not increasing:
        logger.warning("f(c) is not increasing on the sampled grid")
    return MonotonicityReport(cs=tuple(float(c) for c in cs), values=tuple(values), increasing=increasing)


def soft_conditions(V: Potential, theta: float, c0: float, c1: float) -> Tuple[float, float]:
    """Residuals of the two soft-edge contour equations."""
    m = ConformalMap.soft(theta, c0, c1)
    f0 = contour_integral(m, field_integrand(V, m, 0.0)).real
    f1 = contour_integral(m, field_integrand(V, m, -1.0)).real
    return f0 - (1.0 + theta), f1 - 1.0


def _admissible(c0: float, c1: float) -> bool:
    return c0 > c1 > 0.0


def solve_c0_c1(V: Potential, theta: float, guess: Tuple[float, float]) -> Tuple[float, float]:
    if not _admissible(*guess):
        raise InvalidSolution(f"initial guess {guess} violates c0 > c1 > 0")
    c0, c1 = solve_2d(lambda a, b: soft_conditions(V, theta, a, b), guess,
                      tol=_DEFAULTS["solve_tol"], admissible=_admissible)
    if not _admissible(c0, c1):
        raise InvalidSolution(f"soft-edge solution ({c0}, {c1}) violates c0 > c1 > 0")
    crit = critical_points(ConformalMap.soft(theta, c0, c1))
    if not 0.0 < crit.image_a < crit.image_b:
        raise InvalidSolution(f"soft-edge support [{crit.image_a}, {crit.image_b}] is not inside (0, inf)")
    logger.info("soft-edge parameters c0=%.12g c1=%.12g, support [%.6g, %.6g]",
                c0, c1, crit.image_a, crit.image_b)
    return c0, c1


def solve_c0_c1_continued(V: Potential, theta: float, start: Potential,
                          guess: Tuple[float, float], steps: int) -> Tuple[float, float]:
    """Follow the soft solution from `start` to V along V_t = (1-t) start + t V."""
    if not (V.is_polynomial and start.is_polynomial):
        raise NoConvergence("continuation needs polynomial potentials")
    size = max(len(V.coeffs), len(start.coeffs))
    target = np.pad(V.coeffs, (0, size - len(V.coeffs)))
    origin = np.pad(start.coeffs, (0, size - len(start.coeffs)))
    current = guess
    for t in np.linspace(0.0, 1.0, steps + 1):
        step_potential = Potential.polynomial((1.0 - t) * origin + t * target)
        current = solve_c0_c1(step_potential, theta, current)
        logger.debug("continuation t=%.3f -> (%.8g, %.8g)", t, *current)
    return current
