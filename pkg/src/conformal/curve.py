"""The curve gamma = gamma_1 + conj(gamma_1) on which J takes real values.

gamma_1 is written in polar form s = r(phi) e^{i phi}, phi in (0, pi), with
r(phi) the root of

    sum_k w_k arg(A_k + r e^{i phi}) = phi / theta,

whose left-hand side increases in r. phi = 0 is the right critical point
s_b; phi = pi is -1 (hard) or s_a (soft).
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre

from src.conformal.config import contourDefaults, curveDefaults, inversionDefaults
from src.conformal.maps import (
    ConformalMap,
    critical_points,
    log_derivative,
    log_map,
    map_eval,
    second_derivative,
)
from src.core.errors import (
    BracketFailure,
    InvalidConfiguration,
    InvalidSolution,
    NoConvergence,
    NonConvergence,
    OutOfRange,
)
from src.numerics.roots import find_root_monotone, newton_complex

logger = logging.getLogger(__name__)

_CURVE = curveDefaults()
_CONTOUR = contourDefaults()
_INVERSION = inversionDefaults()


# ============================================================================
# ANGLE EQUATION
# ============================================================================

def _angle_residual(m: ConformalMap, r, phi):
    total = 0.0
    for weight, a in m.angle_terms():
        total = total + weight * np.arctan2(r * np.sin(phi), a + r * np.cos(phi))
    return total - phi / m.theta


def _angle_partials(m: ConformalMap, r, phi):
    """(dF/dr, dF/dphi) of the angle equation."""
    f_r, f_phi = 0.0, -1.0 / m.theta
    for weight, a in m.angle_terms():
        # |A + s|^2 as a sum of squares; the expanded form cancels to 0 near s = -A
        near = a + r * np.cos(phi)
        d = near * near + (r * np.sin(phi)) ** 2
        f_r = f_r + weight * a * np.sin(phi) / d
        f_phi = f_phi + weight * r * (r + a * np.cos(phi)) / d
    return f_r, f_phi


def _residual_floor(m: ConformalMap, r, phi):
    """Rounding level of the angle equation; it grows as the curve nears -1."""
    floor = 0.0
    for weight, a in m.angle_terms():
        gap = np.abs(a + r * np.exp(1j * phi))
        floor = floor + weight * 8e-16 * np.maximum(1.0, r) / np.maximum(gap, 1e-300)
    return floor


def _radius_bound(m: ConformalMap) -> float:
    if m.is_hard:
        return 2.0
    return 2.0 * (m.c0 / m.c1 + 1.0)


def radius_at(m: ConformalMap, phi: float) -> float:
    """r(phi) for a single angle by bracketing."""
    if not 0.0 < phi < math.pi:
        raise OutOfRange(f"phi={phi} outside (0, pi)")
    def f(r):
        return _angle_residual(m, r, phi)

    r = find_root_monotone(f, 0.0, _radius_bound(m), tol=float("inf"))
    if abs(f(r)) > _CURVE["radius_tol"] + _residual_floor(m, r, phi):
        raise NoConvergence(f"curve radius at phi={phi}: angle residual {abs(f(r)):.3g}")
    return r


def radius_derivative(m: ConformalMap, r, phi):
    """r'(phi) by implicit differentiation of the angle equation."""
    f_r, f_phi = _angle_partials(m, r, phi)
    return -f_phi / f_r


def _radii(m: ConformalMap, phis: np.ndarray, max_iter: int = 100) -> np.ndarray:
    """Vectorized safeguarded Newton for r(phi) on many angles at once."""
    lo = np.zeros_like(phis)
    hi = np.full_like(phis, _radius_bound(m))
    for _ in range(_CURVE["bracket_expansions"]):
        short = _angle_residual(m, hi, phis) <= 0.0
        if not np.any(short):
            break
        hi[short] *= 2.0
    else:
        raise BracketFailure("curve radius not bracketed")

    r = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f = _angle_residual(m, r, phis)
        f_r, _ = _angle_partials(m, r, phis)
        above = f > 0.0
        hi = np.where(above, r, hi)
        lo = np.where(above, lo, r)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = r - f / f_r
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        new_r = np.where(bad, 0.5 * (lo + hi), step)
        moved = np.max(np.abs(new_r - r))
        r = new_r
        if moved <= 4e-16 * max(1.0, float(np.max(r))):
            break
    excess = np.abs(_angle_residual(m, r, phis)) - _residual_floor(m, r, phis)
    worst = float(np.max(excess))
    if worst > _CURVE["radius_tol"]:
        raise NoConvergence(f"curve radii: angle residual {worst:.3g}")
    return r


# ============================================================================
# CURVE SAMPLES
# ============================================================================

@dataclass(frozen=True)
class CurveSamples:
    map: ConformalMap
    phis: np.ndarray
    radii: np.ndarray
    nodes: np.ndarray
    images: np.ndarray
    left: float
    right: float
    left_image: float
    right_image: float

    def __len__(self):
        return len(self.phis)

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.right_image))

    def lookup(self, x: float) -> complex:
        """Curve point whose image is interpolated closest to x."""
        # images decrease with phi
        xs = self.images[::-1]
        phi = float(np.interp(x, xs, self.phis[::-1]))
        r = float(np.interp(x, xs, self.radii[::-1]))
        return r * complex(math.cos(phi), math.sin(phi))

    def rows(self):
        """(phi, Re s, Im s, J(s)) rows for export."""
        for phi, s, image in zip(self.phis, self.nodes, self.images):
            yield float(phi), float(s.real), float(s.imag), float(image)


def angle_grid(count: int) -> np.ndarray:
    """Angles in (0, pi) clustered toward both ends."""
    k = np.arange(count)
    return 0.5 * math.pi * (1.0 - np.cos(math.pi * (k + 0.5) / count))


def trace_curve(m: ConformalMap, count: int = _CURVE["nodes"]) -> CurveSamples:
    if count < _CURVE["min_nodes"]:
        raise InvalidConfiguration(f"curve needs at least {_CURVE['min_nodes']} nodes, got {count}")
    phis = angle_grid(count)
    radii = np.array([radius_at(m, float(phi)) for phi in phis])
    nodes = radii * np.exp(1j * phis)
    values = np.asarray(map_eval(m, nodes))
    crit = critical_points(m)

    scale = max(1.0, abs(crit.image_b))
    leak = float(np.max(np.abs(values.imag)))
    if leak > _CURVE["image_tol"] * scale:
        raise InvalidSolution(f"J leaves the real axis on the curve: max |Im J| = {leak:.3g}")
    images = values.real
    if np.any(np.diff(images) >= 0.0):
        raise InvalidSolution("J is not monotone along the traced curve")

    logger.debug("traced %s curve: %d nodes, images in (%g, %g)", m.kind.value, count,
                 images[-1], images[0])
    return CurveSamples(map=m, phis=phis, radii=radii, nodes=nodes, images=images,
                        left=crit.left_point, right=crit.s_b,
                        left_image=crit.left_image, right_image=crit.image_b)


def curve_for(m: ConformalMap, curve: Optional[CurveSamples] = None) -> CurveSamples:
    """A curve for m, reusing `curve` when only the hard-edge scale c differs."""
    if curve is None:
        return trace_curve(m)
    if curve.map == m:
        return curve
    if m.is_hard and curve.map.is_hard and curve.map.theta == m.theta:
        ratio = m.c / curve.map.c
        return replace(curve, map=m, images=curve.images * ratio,
                       right_image=curve.right_image * ratio)
    return trace_curve(m, len(curve))


def inside_curve(curve: CurveSamples, s: complex) -> bool:
    """True when s lies strictly inside the closed curve."""
    s = complex(s)
    if s.imag == 0.0:
        return curve.left < s.real < curve.right
    phi = math.atan2(abs(s.imag), s.real)
    return abs(s) < radius_at(curve.map, phi)


# ============================================================================
# INVERSION
# ============================================================================

def _edge_guess(m: ConformalMap, point: float, image: float, x: float) -> complex:
    """Square-root departure from a critical point into the upper half plane."""
    root = np.sqrt(complex(2.0 * (x - image) / second_derivative(m, point)))
    guess = point + root
    return guess if guess.imag > 0 else point - root


def _hard_left_guess(m: ConformalMap, x: float) -> complex:
    theta = m.theta
    phase = complex(math.cos(math.pi / (theta + 1.0)), math.sin(math.pi / (theta + 1.0)))
    return -1.0 + m.c ** (-theta / (theta + 1.0)) * phase * x ** (theta / (theta + 1.0))


def _initial_guess(curve: CurveSamples, x: float) -> complex:
    m = curve.map
    if x > curve.images[0]:
        return _edge_guess(m, curve.right, curve.right_image, x)
    if x < curve.images[-1]:
        if m.is_hard:
            return _hard_left_guess(m, x)
        return _edge_guess(m, curve.left, curve.left_image, x)
    return curve.lookup(x)


def _invert_hard(m: ConformalMap, log_x: float, guess: complex) -> complex:
    """Root u of log c + log u + (log u - log(u - 1))/theta = log x."""
    theta = m.theta
    log_c = math.log(m.c)

    def f(u):
        return log_c + cmath.log(u) + (cmath.log(u) - cmath.log(u - 1.0)) / theta - log_x

    def df(u):
        return 1.0 / u + (1.0 / u - 1.0 / (u - 1.0)) / theta

    return newton_complex(f, df, guess, tol=_INVERSION["newton_tol"],
                          admissible=lambda u: u.imag > 0.0)


def invert(m: ConformalMap, curve: Optional[CurveSamples], x: float) -> Tuple[complex, complex]:
    """(I_plus, I_minus): the preimages of x on gamma, I_plus in the upper half plane."""
    curve = curve_for(m, curve)
    lo, hi = curve.left_image, curve.right_image
    width = hi - lo
    if not lo - 1e-15 * width <= x <= hi + 1e-15 * width:
        raise OutOfRange(f"x={x} outside [{lo}, {hi}]")
    if x >= hi - 1e-15 * width:
        return complex(curve.right), complex(curve.right)
    if x <= lo + 1e-15 * width:
        return complex(curve.left), complex(curve.left)

    log_x = math.log(x)
    if m.is_hard:
        # iterate on u = s + 1 so log(s + 1) keeps full precision near the hard edge
        s = _invert_hard(m, log_x, _initial_guess(curve, x) + 1.0) - 1.0
    else:
        s = newton_complex(
            lambda z: complex(log_map(m, z)) - log_x,
            lambda z: complex(log_derivative(m, z)),
            _initial_guess(curve, x),
            tol=_INVERSION["newton_tol"],
            admissible=lambda z: z.imag > 0.0,
        )
    residual = abs(map_eval(m, s) - x)
    if residual > _INVERSION["image_tol"] * max(1.0, x):
        raise NoConvergence(f"inverse of x={x}: |J(s) - x| = {residual:.3g}")
    return s, s.conjugate()


# ============================================================================
# CONTOUR INTEGRALS
# ============================================================================

def _breakpoints(panels: int, graded: bool) -> np.ndarray:
    uniform = np.linspace(0.0, math.pi, panels + 1)
    if not graded:
        return uniform
    h = uniform[-1] - uniform[-2]
    levels = _CONTOUR["grading_levels"]
    tail = math.pi - h * 2.0 ** -np.arange(1, levels + 1)
    return np.concatenate([uniform[:-1], tail, [math.pi]])


@lru_cache(maxsize=64)
def _arc(m: ConformalMap, panels: int, points: int):
    """Nodes s(phi) on gamma_1 and weights ds = (r' + i r) e^{i phi} dphi."""
    gl_x, gl_w = legendre.leggauss(points)
    breaks = _breakpoints(panels, graded=m.is_hard)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    phis = (0.5 * (hi + lo) + half * gl_x).ravel()
    weights = (half * gl_w).ravel()
    r = _radii(m, phis)
    with np.errstate(divide="ignore", invalid="ignore"):
        dr = radius_derivative(m, r, phis)
    rotation = np.exp(1j * phis)
    nodes, ds = r * rotation, (dr + 1j * r) * rotation * weights
    bad = ~(np.isfinite(nodes) & np.isfinite(ds))
    if np.any(bad):
        worst = float(np.min(np.abs(nodes[bad] + 1.0)))
        raise NonConvergence(f"contour nodes: {int(bad.sum())} of {len(phis)} non-finite "
                             f"(closest approach to -1: {worst:.3g})")
    return nodes, ds


def contour_nodes(m: ConformalMap, panels: int = _CONTOUR["panels"],
                  points: int = _CONTOUR["points_per_panel"]):
    """Quadrature nodes on gamma_1 and their weights ds."""
    return _arc(m, panels, points)


def _arc_for(m: ConformalMap, panels: int, points: int):
    # The curve depends only on theta (hard) or c0/c1 (soft)
    if m.is_hard:
        representative = ConformalMap.hard(m.theta, 1.0)
    else:
        representative = ConformalMap.soft(m.theta, m.c0 / m.c1, 1.0)
    return _arc(representative, panels, points)


def _closed_integral(g: Callable, m: ConformalMap, panels: int, points: int,
                     real_symmetric: bool, scale: float) -> complex:
    nodes, ds = _arc_for(m, panels, points)
    if scale != 1.0:
        nodes, ds = scale * nodes, scale * ds
    upper = np.sum(np.asarray(g(nodes)) * ds)
    if real_symmetric:
        # g(conj s) = conj g(s): the lower arc contributes the conjugate of the upper one
        return complex(upper.imag / math.pi, 0.0)
    # lower arc is conj(gamma_1) traversed from phi = pi back to 0
    lower = -np.sum(np.asarray(g(np.conj(nodes))) * np.conj(ds))
    return complex((upper + lower) / (2j * math.pi))


def contour_integral(m: ConformalMap, g: Callable, real_symmetric: bool = True,
                     panels: int = _CONTOUR["panels"],
                     points: int = _CONTOUR["points_per_panel"],
                     tol: float = _CONTOUR["tol"], scale: float = 1.0) -> complex:
    """(1/2 pi i) times the counterclockwise integral of g over gamma.

    g is called with numpy arrays of curve points. Set real_symmetric=False
    when g(conj s) != conj g(s). scale > 1 integrates over the dilated curve
    scale * gamma instead. The panel count doubles until two consecutive
    estimates agree.
    """
    previous = _closed_integral(g, m, panels, points, real_symmetric, scale)
    for _ in range(_CONTOUR["max_doublings"]):
        panels *= 2
        current = _closed_integral(g, m, panels, points, real_symmetric, scale)
        if abs(current - previous) <= tol * max(1.0, abs(current)):
            return current
        previous = current
    raise NonConvergence(f"contour integral not converged: last change {abs(current - previous):.3g}")
