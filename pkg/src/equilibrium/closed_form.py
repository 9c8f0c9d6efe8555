"""Explicit densities and the polynomial N_in path.

For polynomial V(x) = sum_k v_k x^k the inside solution of the N problem is

    N_in(s) = sum_k k v_k PP[J(s)^k] - 1,

where PP takes the polynomial part at infinity. The density then follows
from psi(x) = Im N_in(I_plus(x)) / (pi x).
"""

import logging
import math
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special

from src.conformal.curve import CurveSamples, invert
from src.conformal.maps import ConformalMap, cardano_invert, hard_edge_endpoint
from src.core.errors import InvalidConfiguration, OutOfRange
from src.potentials.potential import Potential

logger = logging.getLogger(__name__)


def _power_polynomial_part(m: ConformalMap, k: int) -> Polynomial:
    """Polynomial part at infinity of J(s)^k = (c1 s + c0)^k (1 + 1/s)^{k/theta}."""
    c0, c1 = (m.c, m.c) if m.is_hard else (m.c0, m.c1)
    beta = k / m.theta
    coeffs = np.zeros(k + 1)
    for i in range(k + 1):
        outer = special.comb(k, i) * c1 ** i * c0 ** (k - i)
        for j in range(i + 1):
            coeffs[i - j] += outer * special.binom(beta, j)
    return Polynomial(coeffs)


def n_inside_polynomial(V: Potential, m: ConformalMap) -> Polynomial:
    if not V.is_polynomial:
        raise InvalidConfiguration("N_in has a closed form only for polynomial V")
    total = Polynomial([-1.0])
    for k, v in enumerate(V.coeffs):
        if k and v:
            total = total + k * v * _power_polynomial_part(m, k)
    return total


def density_from_n_inside(n_inside: Polynomial, m: ConformalMap,
                          curve: Optional[CurveSamples], x: float) -> float:
    i_plus, _ = invert(m, curve, x)
    return float(n_inside(i_plus).imag / (math.pi * x))


# ============================================================================
# LAGUERRE WEIGHT, V = rho x
# ============================================================================

def laguerre_density_closed_form(rho: float, x: float) -> float:
    """theta = 2 Laguerre density in terms of real cube roots."""
    b = 3.0 * math.sqrt(3.0) / rho
    if not 0.0 < x <= b:
        raise OutOfRange(f"x={x} outside (0, {b}]")
    root = math.sqrt(max(0.0, 1.0 - rho * rho * x * x / 27.0))
    spread = np.cbrt(1.0 + root) - np.cbrt(1.0 - root)
    return float(math.sqrt(3.0) * rho ** (2.0 / 3.0) * spread / (2.0 * math.pi * x ** (1.0 / 3.0)))


def laguerre_density(theta: float, rho: float, x: float,
                     curve: Optional[CurveSamples] = None) -> float:
    """Laguerre density for any theta >= 1: theta Im I_plus(x) / (pi x) with c = theta/rho."""
    m = ConformalMap.hard(theta, theta / rho)
    b = hard_edge_endpoint(theta, m.c)
    if not 0.0 < x < b:
        raise OutOfRange(f"x={x} outside (0, {b})")
    i_plus, _ = invert(m, curve, x)
    return theta * i_plus.imag / (math.pi * x)


# ============================================================================
# QUADRATIC V = tau x^2 + rho x
# ============================================================================

def quadratic_c(tau: float, rho: float, theta: float) -> float:
    """Residue-calculus solution of the hard-edge equation for c."""
    root = math.sqrt(rho * rho + 16.0 * tau + 8.0 * tau * theta)
    return (-rho * theta + theta * root) / (4.0 * (2.0 * tau + tau * theta))


def hard_edge_endpoint_quadratic(tau: float, rho: float, theta: float) -> float:
    return hard_edge_endpoint(theta, quadratic_c(tau, rho, theta))


def quadratic_n_inside(tau: float, rho: float, theta: float, c: float) -> Polynomial:
    shift = (theta + 1.0) / theta
    return Polynomial([
        rho * c * shift + 2.0 * tau * c * c * (theta + 1.0) * (theta + 2.0) / theta ** 2 - 1.0,
        4.0 * tau * c * c * shift + rho * c,
        2.0 * tau * c * c,
    ])


def quadratic_density_hard(tau: float, rho: float, theta: float, c: float,
                           curve: Optional[CurveSamples], x: float) -> float:
    """Hard-edge candidate density from the explicit N_in.

    For theta = 2 the preimage comes from Cardano's formula, so this path
    shares no numerics with the quadrature density.
    """
    n_inside = quadratic_n_inside(tau, rho, theta, c)
    b = hard_edge_endpoint(theta, c)
    if not 0.0 < x < b:
        raise OutOfRange(f"x={x} outside (0, {b})")
    if theta == 2.0:
        i_plus, _ = cardano_invert(c, x)
        return float(n_inside(i_plus).imag / (math.pi * x))
    return density_from_n_inside(n_inside, ConformalMap.hard(theta, c), curve, x)


def soft_quadratic_parameters(rho: float):
    """(c0, c1) for theta = 2, V = x^2 + rho x, rho < -2."""
    if not rho < -2.0:
        raise OutOfRange(f"soft-edge closed form needs rho < -2, got {rho}")
    return -rho / 2.0, -2.0 / rho


def quadratic_density_soft(rho: float, curve: Optional[CurveSamples], x: float) -> float:
    """Soft-edge density for theta = 2, V = x^2 + rho x with N_in = (2/rho^2)(4s + rho^2)(s + 1)."""
    c0, c1 = soft_quadratic_parameters(rho)
    m = ConformalMap.soft(2.0, c0, c1)
    n_inside = Polynomial([2.0, 2.0 + 8.0 / rho ** 2, 8.0 / rho ** 2])
    return density_from_n_inside(n_inside, m, curve, x)
