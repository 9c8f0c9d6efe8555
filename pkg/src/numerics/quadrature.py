"""Quadrature kernels.

Half-line integrals run in arbitrary precision (mpmath) in the variable
t = log(1 + x); finite-interval integrals for the equilibrium layer run in
hardware doubles through QUADPACK.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import mpmath
import numpy as np
from scipy import integrate

from src.core.errors import NonConvergence
from src.numerics.precision import PrecisionContext, QuadratureScheme, QuadratureSpec

logger = logging.getLogger(__name__)

# Breakpoints (in t = log(1+x)) handed to tanh-sinh on the half-line
TANH_SINH_BREAKPOINTS = (0, 1, 2, 3, 4, 5, 6, 8)

# Geometric levels that refine the first half-line panel toward x = 0
GRADING_LEVELS = 40


# ============================================================================
# RULES
# ============================================================================

def _legendre_and_derivative(n, x):
    p_prev, p = mpmath.mpf(1), x
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if n == 0:
        return mpmath.mpf(1), mpmath.mpf(0)
    dp = n * (x * p - p_prev) / (x * x - 1)
    return p, dp


@lru_cache(maxsize=32)
def _gauss_legendre_cached(n: int, bits: int):
    with mpmath.workprec(bits):
        stop = mpmath.mpf(2) ** (-bits + 8)
        nodes, weights = [], []
        for i in range(1, n + 1):
            x = mpmath.cos(mpmath.pi * (i - mpmath.mpf(1) / 4) / (n + mpmath.mpf(1) / 2))
            for _ in range(100):
                p, dp = _legendre_and_derivative(n, x)
                dx = p / dp
                x -= dx
                if abs(dx) <= stop:
                    break
            _, dp = _legendre_and_derivative(n, x)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return tuple(nodes), tuple(weights)


def gauss_legendre_rule(n: int, ctx: PrecisionContext) -> Tuple[Tuple, Tuple]:
    """Gauss-Legendre nodes and weights on [-1, 1] at the context's precision."""
    return _gauss_legendre_cached(n, ctx.mantissa_bits)


def _laguerre_and_derivative(n, alpha, x):
    l_prev, l = mpmath.mpf(1), 1 + alpha - x
    for k in range(2, n + 1):
        l_prev, l = l, ((2 * k - 1 + alpha - x) * l - (k - 1 + alpha) * l_prev) / k
    dl = (n * l - (n + alpha) * l_prev) / x
    return l, dl


@lru_cache(maxsize=16)
def _gauss_laguerre_cached(n: int, alpha: float, bits: int):
    with mpmath.workprec(bits):
        a = mpmath.mpf(alpha)
        stop = mpmath.mpf(2) ** (-bits + 8)
        nodes, weights = [], []
        z = mpmath.mpf(0)
        for i in range(n):
            # Initial guesses after the classic gaulag recipe
            if i == 0:
                z = (1 + a) * (3 + 0.92 * a) / (1 + 2.4 * n + 1.8 * a)
            elif i == 1:
                z += (15 + 6.25 * a) / (1 + 0.9 * a + 2.5 * n)
            else:
                ai = i - 1
                z += ((1 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * a / (1 + 3.5 * ai)) \
                    * (z - nodes[i - 2]) / (1 + 0.3 * a)
            for _ in range(200):
                l, dl = _laguerre_and_derivative(n, a, z)
                dz = l / dl
                z -= dz
                if abs(dz) <= stop * (1 + abs(z)):
                    break
            _, dl = _laguerre_and_derivative(n, a, z)
            nodes.append(z)
            weights.append(mpmath.gamma(n + a + 1) / (mpmath.factorial(n) * z * dl * dl))
        return tuple(nodes), tuple(weights)


def gauss_laguerre_rule(n: int, alpha: float, ctx: PrecisionContext) -> Tuple[Tuple, Tuple]:
    """Generalized Gauss-Laguerre rule for the weight x^alpha e^{-x}."""
    return _gauss_laguerre_cached(n, float(alpha), ctx.mantissa_bits)


@dataclass(frozen=True)
class SemiAxisRule:
    """Reusable nodes and weights on [0, cutoff] with the Jacobian folded in."""
    nodes: Tuple
    weights: Tuple
    bits: int

    def integrate(self, f: Callable):
        with mpmath.workprec(self.bits):
            return mpmath.fsum(w * f(x) for x, w in zip(self.nodes, self.weights))

    def as_floats(self):
        return [float(x) for x in self.nodes], [float(w) for w in self.weights]


def _panel_breakpoints(t_max, panel_count: int) -> list:
    uniform = [t_max * i / panel_count for i in range(panel_count + 1)]
    first = uniform[1]
    graded = [first * mpmath.mpf(2) ** (-k) for k in range(GRADING_LEVELS, 0, -1)]
    return [mpmath.mpf(0)] + graded + uniform[1:]


def semiaxis_rule(spec: QuadratureSpec, ctx: PrecisionContext, cutoff=None) -> SemiAxisRule:
    """Panelwise Gauss-Legendre on [0, cutoff] in t = log(1+x).

    The first uniform panel is split geometrically toward t = 0, which keeps
    x^alpha endpoint behavior under control.
    """
    cutoff = spec.cutoff if cutoff is None else cutoff
    gl_nodes, gl_weights = gauss_legendre_rule(spec.points_per_panel, ctx)
    with ctx.workprec():
        t_max = mpmath.log1p(mpmath.mpf(cutoff))
        breaks = _panel_breakpoints(t_max, spec.panel_count)
        nodes, weights = [], []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            half, mid = (hi - lo) / 2, (hi + lo) / 2
            for g, gw in zip(gl_nodes, gl_weights):
                t = mid + half * g
                et = mpmath.exp(t)
                nodes.append(et - 1)
                weights.append(half * gw * et)
    return SemiAxisRule(nodes=tuple(nodes), weights=tuple(weights), bits=ctx.mantissa_bits)


# ============================================================================
# HALF-LINE INTEGRALS (ARBITRARY PRECISION)
# ============================================================================

def _check(value, error, spec: QuadratureSpec, what: str):
    if not mpmath.isfinite(value) or error > spec.tolerance_for(value):
        raise NonConvergence(
            f"{what}: error estimate {mpmath.nstr(error, 5)} exceeds tolerance "
            f"{spec.tolerance_for(value):.3g} (value {mpmath.nstr(value, 10)})"
        )


def _tanh_sinh(f, spec, ctx):
    def g(t):
        et = mpmath.exp(t)
        return f(et - 1) * et

    points = [mpmath.mpf(p) for p in TANH_SINH_BREAKPOINTS] + [mpmath.inf]
    value, error = mpmath.quad(g, points, error=True)
    if error > spec.tolerance_for(value):
        logger.debug("tanh-sinh retry at higher degree (error %s)", mpmath.nstr(error, 5))
        value, error = mpmath.quad(g, points, error=True, maxdegree=12)
    return value, error


def _legendre_panels(f, spec, ctx):
    coarse = semiaxis_rule(spec, ctx).integrate(f)
    fine = semiaxis_rule(spec.refined(), ctx).integrate(f)
    return fine, abs(fine - coarse)


def _laguerre(f, spec, ctx):
    rate = mpmath.mpf(spec.rate)
    alpha = mpmath.mpf(spec.alpha)

    def total(n):
        nodes, weights = gauss_laguerre_rule(n, spec.alpha, ctx)
        return mpmath.fsum(
            w * f(y / rate) * mpmath.exp(y) * y ** (-alpha) for y, w in zip(nodes, weights)
        ) / rate

    n = spec.points_per_panel
    coarse, fine = total(n), total(n + max(n // 2, 1))
    return fine, abs(fine - coarse)


def integrate_semiaxis(f: Callable, spec: QuadratureSpec, ctx: PrecisionContext):
    """Integral of f over [0, inf) at the context's precision.

    Raises NonConvergence when the error estimate stays above
    max(abs_tol, rel_tol*|result|).
    """
    runners = {
        QuadratureScheme.TANH_SINH: _tanh_sinh,
        QuadratureScheme.GAUSS_LEGENDRE_PANELS: _legendre_panels,
        QuadratureScheme.GAUSS_LAGUERRE: _laguerre,
    }
    with ctx.workprec():
        value, error = runners[spec.scheme](f, spec, ctx)
        _check(value, error, spec, f"integrate_semiaxis[{spec.scheme.value}]")
        return +value


# ============================================================================
# FINITE-INTERVAL INTEGRALS (HARDWARE DOUBLES)
# ============================================================================

def integrate_interval(f: Callable[[float], float], lo: float, hi: float, spec: QuadratureSpec) -> float:
    """Adaptive QUADPACK integral; tolerates integrable endpoint singularities."""
    if hi <= lo:
        return 0.0
    result = integrate.quad(f, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                            limit=spec.limit, full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3:
        logger.debug("quad on [%g, %g]: %s", lo, hi, result[3])
    # QUADPACK estimates are pessimistic; allow a margin before failing
    if not abs(value) < float("inf") or error > 100.0 * spec.tolerance_for(value):
        raise NonConvergence(
            f"quadrature on [{lo:.6g}, {hi:.6g}] error {error:.3g} above tolerance"
        )
    return value


def integrate_log_singular(f: Callable[[float], float], lo: float, hi: float, x0: float,
                           spec: QuadratureSpec) -> float:
    """Integral of f over [lo, hi] with an integrable log singularity at x0.

    The interval is split at x0 so the singularity sits on a panel endpoint.
    """
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if lo < x0 < hi:
        return integrate_interval(f, lo, x0, spec) + integrate_interval(f, x0, hi, spec)
    return integrate_interval(f, lo, hi, spec)


def tensor_semiaxis(f: Callable[..., "np.ndarray"], dim: int, rule: SemiAxisRule) -> float:
    """Tensor-product rule over [0, inf)^dim in hardware doubles.

    f receives dim broadcast coordinate arrays and returns integrand values.
    Used for small-instance oracles.
    """
    nodes, weights = rule.as_floats()
    nodes, weights = np.asarray(nodes), np.asarray(weights)
    grids = np.meshgrid(*([nodes] * dim), indexing="ij")
    wgrids = np.meshgrid(*([weights] * dim), indexing="ij")
    return float(np.sum(np.prod(wgrids, axis=0) * f(*grids)))


def decay_cutoff(log_f: Callable[[float], float], bits: int, start: float = 1.0,
                 max_doublings: int = 400) -> float:
    """Smallest scanned x (doubling from `start`) past the peak of log_f where
    the integrand has dropped below the working precision relative to the peak."""
    drop = bits * np.log(2.0) + 30.0
    x, peak = start, log_f(start)
    for _ in range(max_doublings):
        x *= 2.0
        value = log_f(x)
        peak = max(peak, value)
        if value < peak - drop:
            return x
    raise NonConvergence(f"integrand does not decay below 2^-{bits} of its peak")
