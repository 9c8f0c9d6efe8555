"""Build the equilibrium measure and decide its left-edge regime."""

import logging
from functools import partial
from typing import Callable, Optional, Tuple

import numpy as np

from src.conformal.curve import CurveSamples, curve_for, trace_curve
from src.conformal.maps import ConformalMap, critical_points
from src.core.errors import (
    BiorthoError,
    InvalidConfiguration,
    SolverError,
    Unclassifiable,
    ValidationError,
)
from src.equilibrium.closed_form import density_from_n_inside, n_inside_polynomial
from src.equilibrium.config import criticalSearchDefaults, equilibriumDefaults
from src.equilibrium.density import density_hard, density_soft, edge_constants
from src.equilibrium.measure import EquilibriumMeasure, MassDensity, Regime
from src.equilibrium.solver import solve_c, solve_c0_c1, solve_c0_c1_continued
from src.potentials.potential import Potential

logger = logging.getLogger(__name__)

_DEFAULTS = equilibriumDefaults()


def density_function(V: Potential, m: ConformalMap, curve: CurveSamples) -> Callable[[float], float]:
    """psi(x) by the real quadrature over the support."""
    if m.is_hard:
        return partial(density_hard, V, m.theta, m.c, curve)
    return partial(density_soft, V, m.theta, m.c0, m.c1, curve)


def two_path_gap(measure: EquilibriumMeasure, points: Optional[int] = None) -> float:
    """Largest |psi_quadrature - psi_N_in| on interior points, for polynomial V."""
    V = measure.potential
    if not V.is_polynomial:
        raise InvalidConfiguration("the N_in density exists only for polynomial V")
    m, curve = measure.map, measure.curve
    n_inside = n_inside_polynomial(V, m)
    count = _DEFAULTS["two_path_points"] if points is None else points
    gap = 0.0
    for x in _validation_grid(*measure.support, count=count):
        quad = measure.density.psi_exact(float(x))
        closed = density_from_n_inside(n_inside, m, curve, float(x))
        gap = max(gap, abs(quad - closed))
    logger.info("two-path density gap over %d points: %.3g", count, gap)
    return gap


def _validation_grid(left: float, right: float, count: Optional[int] = None) -> np.ndarray:
    count = _DEFAULTS["validation_points"] if count is None else count
    return left + (right - left) * (np.arange(count) + 0.5) / count


def _build_measure(V: Potential, theta: float, m: ConformalMap, regime: Regime,
                   curve: Optional[CurveSamples] = None,
                   constants: Optional[Tuple[float, float]] = None) -> EquilibriumMeasure:
    curve = curve_for(m, curve)
    crit = critical_points(m)
    support = (crit.left_image, crit.image_b)
    psi = density_function(V, m, curve)
    density = MassDensity.build(psi, support[0], support[1], theta, hard_left=m.is_hard)
    return EquilibriumMeasure(theta=theta, potential=V, regime=regime, support=support, map=m,
                              curve=curve, density=density, edge_constants=constants)


def _validates(measure: EquilibriumMeasure) -> bool:
    grid = _validation_grid(*measure.support)
    worst = min(measure.density(float(x)) for x in grid)
    mass = measure.density.total_mass
    ok = worst >= -_DEFAULTS["negativity_tol"] and abs(mass - 1.0) <= _DEFAULTS["mass_tol"]
    logger.info("%s candidate: min psi %.3g, mass %.10f -> %s", measure.regime.value, worst, mass,
                "valid" if ok else "rejected")
    return ok


def _soft_candidate(V: Potential, theta: float, c: float) -> EquilibriumMeasure:
    guess = (c, c * theta / (1.0 + theta))
    try:
        c0, c1 = solve_c0_c1(V, theta, guess)
    except (SolverError, ValidationError) as exc:
        if not V.is_polynomial:
            raise
        logger.warning("direct soft-edge solve failed (%s); continuing from a deeper potential", exc)
        shift = max(2.0, abs(V.rho))
        coeffs = list(V.coeffs) + [0.0] * max(0, 2 - len(V.coeffs))
        coeffs[1] -= shift
        start = Potential.polynomial(coeffs)
        start_c = solve_c(start, theta)
        c0, c1 = solve_c0_c1_continued(V, theta, start, (start_c, start_c * theta / (1.0 + theta)),
                                       _DEFAULTS["continuation_steps"])
    m = ConformalMap.soft(theta, c0, c1)
    return _build_measure(V, theta, m, Regime.SOFT_EDGE, curve=trace_curve(m, _DEFAULTS["curve_nodes"]))


def classify_edge(V: Potential, theta: float) -> EquilibriumMeasure:
    """Hard-edge candidate first; d1 decides hard, critical or soft."""
    c = solve_c(V, theta)
    m = ConformalMap.hard(theta, c)
    curve = trace_curve(m, _DEFAULTS["curve_nodes"])
    d1, d2 = edge_constants(V, theta, c, curve)
    tol = _DEFAULTS["critical_rel_tol"] * max(1.0, abs(d2))

    if abs(d1) < tol:
        logger.info("d1=%.3g below %.3g: critical edge", d1, tol)
        return _build_measure(V, theta, m, Regime.CRITICAL_EDGE, curve, (d1, d2))

    if d1 > 0.0:
        measure = _build_measure(V, theta, m, Regime.HARD_EDGE, curve, (d1, d2))
        if _validates(measure):
            return measure
        logger.warning("hard-edge candidate failed validation although d1 > 0")

    try:
        measure = _soft_candidate(V, theta, c)
    except BiorthoError as exc:
        raise Unclassifiable(f"neither hard- nor soft-edge construction holds: {exc}") from exc
    measure.edge_constants = (d1, d2)
    if not _validates(measure):
        raise Unclassifiable("soft-edge candidate failed validation")
    return measure


def hard_d1(theta: float, tau: float, rho: float) -> float:
    V = Potential.quadratic(tau, rho)
    return edge_constants(V, theta, solve_c(V, theta))[0]


def locate_critical_rho(theta: float, tau: float = 1.0, lo: Optional[float] = None,
                        hi: Optional[float] = None) -> float:
    """Linear coefficient where d1 of V = tau x^2 + rho x changes sign, by bisection."""
    d = criticalSearchDefaults()
    lo = d["rho_lo"] if lo is None else lo
    hi = d["rho_hi"] if hi is None else hi
    f_lo, f_hi = hard_d1(theta, tau, lo), hard_d1(theta, tau, hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise Unclassifiable(f"d1 does not change sign on [{lo}, {hi}]")
    for _ in range(d["max_iter"]):
        if hi - lo <= d["tol"]:
            break
        mid = 0.5 * (lo + hi)
        f_mid = hard_d1(theta, tau, mid)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    rho_c = 0.5 * (lo + hi)
    logger.info("critical linear coefficient for theta=%g, tau=%g: %.8f", theta, tau, rho_c)
    return rho_c
