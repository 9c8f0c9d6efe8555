"""Recurrence coefficients and the Christoffel-Darboux identity for rational theta = a/b.

Inner products are taken in the variable u with x = u^b, where

    <f, g> = int_0^inf f(u^b) g(u^a) b u^{b-1} w(u^b) du

has only integer powers of u, and are cross-checked against exact bimoment
combinations.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import mpmath

from src.biorthogonal.config import biorthogonalDefaults, innerProductRuleDefaults
from src.biorthogonal.system import BiorthogonalSystem, horner, as_mp
from src.core.errors import DegeneratePoint, IrrationalTheta, PrecisionExhausted
from src.numerics.precision import QuadratureSpec, to_mpf
from src.numerics.quadrature import decay_cutoff, semiaxis_rule

logger = logging.getLogger(__name__)

_DEFAULTS = biorthogonalDefaults()


@dataclass(frozen=True)
class RecurrenceCoeffs:
    k: int
    u: Tuple
    v: Tuple


def _require_rational(sys: BiorthogonalSystem) -> Tuple[int, int]:
    if sys.theta_rational is None:
        raise IrrationalTheta(
            f"theta={sys.theta} was not given as an exact fraction; recurrences need theta=a/b"
        )
    return sys.theta_rational


class InnerProductEngine:
    """Polynomial values at the nodes of a u-variable rule, computed once per system."""

    def __init__(self, sys: BiorthogonalSystem):
        a, b = _require_rational(sys)
        self.sys, self.a, self.b = sys, a, b
        w = sys.weight
        power = float(a * b + (a + b) * sys.jmax)

        def log_f(u: float) -> float:
            return (power + b - 1) * math.log(u) + math.log(b) + float(w.log_weight(u ** b))

        spec = QuadratureSpec(**innerProductRuleDefaults())
        rule = semiaxis_rule(spec, sys.ctx, decay_cutoff(log_f, sys.ctx.mantissa_bits))
        self.weights, self.shift_a, self.shift_b = [], [], []
        self.p_vals, self.q_vals = [], []
        with sys.ctx.workprec():
            for u, weight in zip(rule.nodes, rule.weights):
                xb, xa = u ** b, u ** a
                self.weights.append(weight * b * u ** (b - 1) * w.evaluate(xb))
                # x^a at the p-argument u^b and x^b at the q-argument u^a
                self.shift_a.append(xb ** a)
                self.shift_b.append(xa ** b)
                self.p_vals.append([horner(c, xb) for c in sys.p_coeffs])
                self.q_vals.append([horner(c, xa) for c in sys.q_coeffs])
        logger.debug("inner-product engine: %d nodes, a=%d b=%d", len(self.weights), a, b)

    def shifted_pq(self, i: int, j: int):
        """<x^a p_i, q_j> by quadrature; zero when an index is negative."""
        if i < 0 or j < 0:
            return mpmath.mpf(0)
        with self.sys.ctx.workprec():
            return mpmath.fsum(wt * s * p[i] * q[j] for wt, s, p, q in
                               zip(self.weights, self.shift_a, self.p_vals, self.q_vals))

    def p_shifted_q(self, i: int, j: int):
        """<p_i, x^b q_j> by quadrature."""
        if i < 0 or j < 0:
            return mpmath.mpf(0)
        with self.sys.ctx.workprec():
            return mpmath.fsum(wt * s * p[i] * q[j] for wt, s, p, q in
                               zip(self.weights, self.shift_b, self.p_vals, self.q_vals))


@lru_cache(maxsize=8)
def engine_for(sys: BiorthogonalSystem) -> InnerProductEngine:
    return InnerProductEngine(sys)


def _bimoment_shifted_pq(sys: BiorthogonalSystem, a: int, i: int, j: int):
    if i < 0 or j < 0:
        return mpmath.mpf(0)
    P, Q, m = sys.p_coeffs[i], sys.q_coeffs[j], sys.table.m
    return mpmath.fsum(P[r] * Q[s] * m(s, r + a) for r in range(len(P)) for s in range(len(Q)))


def _bimoment_p_shifted_q(sys: BiorthogonalSystem, b: int, i: int, j: int):
    if i < 0 or j < 0:
        return mpmath.mpf(0)
    P, Q, m = sys.p_coeffs[i], sys.q_coeffs[j], sys.table.m
    return mpmath.fsum(P[r] * Q[s] * m(s + b, r) for r in range(len(P)) for s in range(len(Q)))


def _cross_check(quad, exact, label: str):
    gap = abs(quad - exact)
    if gap > _DEFAULTS["residual_limit"]:
        raise PrecisionExhausted(f"{label}: quadrature and bimoment paths differ by {mpmath.nstr(gap, 3)}")
    if gap > _DEFAULTS["cross_check_warn"]:
        logger.warning("%s: quadrature/bimoment gap %s", label, mpmath.nstr(gap, 3))


def recurrence_coeffs(sys: BiorthogonalSystem, k: int) -> RecurrenceCoeffs:
    """u_j(k) = <x^a p_k, q_{k+a-j}> and v_j(k) = <p_{k+b-j}, x^b q_k>, j = 0..a+b."""
    a, b = _require_rational(sys)
    if k + a > sys.jmax or k + b > sys.jmax:
        raise ValueError(f"k={k} needs jmax >= {k + max(a, b)}, have {sys.jmax}")
    engine = engine_for(sys)
    with sys.ctx.workprec():
        u, v = [], []
        for j in range(a + b + 1):
            u_j = engine.shifted_pq(k, k + a - j)
            v_j = engine.p_shifted_q(k + b - j, k)
            _cross_check(u_j, _bimoment_shifted_pq(sys, a, k, k + a - j), f"u_{j}({k})")
            _cross_check(v_j, _bimoment_p_shifted_q(sys, b, k + b - j, k), f"v_{j}({k})")
            u.append(u_j)
            v.append(v_j)
    return RecurrenceCoeffs(k=k, u=tuple(u), v=tuple(v))


def _poly_combination(sys: BiorthogonalSystem, kind: str, top: int, coeffs) -> List:
    out = [mpmath.mpf(0)] * (top + 1)
    for j, c in enumerate(coeffs):
        index = top - j
        if index < 0:
            continue
        for power, value in enumerate(sys.coeffs(kind, index)):
            out[power] += c * value
    return out


def recurrence_residuals(sys: BiorthogonalSystem, k: int) -> Tuple:
    """Coefficient-wise residuals of both recurrences and of the u/v symmetry at k."""
    a, b = _require_rational(sys)
    rc = recurrence_coeffs(sys, k)
    with sys.ctx.workprec():
        lhs_p = [mpmath.mpf(0)] * a + list(sys.p_coeffs[k])
        rhs_p = _poly_combination(sys, "p", k + a, rc.u)
        p_res = max(abs(x - y) for x, y in zip(lhs_p, rhs_p))

        lhs_q = [mpmath.mpf(0)] * b + list(sys.q_coeffs[k])
        rhs_q = _poly_combination(sys, "q", k + b, rc.v)
        q_res = max(abs(x - y) for x, y in zip(lhs_q, rhs_q))

        sym = mpmath.mpf(0)
        for j in range(a + b + 1):
            partner = k + a - j
            if partner < 0 or partner + max(a, b) > sys.jmax:
                continue
            sym = max(sym, abs(rc.u[j] - recurrence_coeffs(sys, partner).v[a + b - j]))
    return p_res, q_res, sym


def verify_cd(sys: BiorthogonalSystem, n: int, x, y):
    """|LHS - RHS| of the Christoffel-Darboux formula at (x, y)."""
    a, b = _require_rational(sys)
    if n + a > sys.jmax:
        raise ValueError(f"n={n} needs jmax >= {n + a}, have {sys.jmax}")
    engine = engine_for(sys)
    with sys.ctx.workprec():
        x, y = as_mp(x), as_mp(y)
        denominator = x ** a - y ** a
        if abs(denominator) < 1e-12:
            raise DegeneratePoint(f"x^a - y^a = {mpmath.nstr(denominator, 3)} at ({x}, {y})")
        y_theta = y ** to_mpf(sys.theta)

        def p(j):
            return horner(sys.p_coeffs[j], x) if j >= 0 else mpmath.mpf(0)

        def q(j):
            return horner(sys.q_coeffs[j], y_theta) if j >= 0 else mpmath.mpf(0)

        lhs = mpmath.fsum(p(k) * q(k) for k in range(n))
        terms = []
        for ell in range(1, a + 1):
            for k in range(max(n - ell, 0), n):
                terms.append(engine.shifted_pq(k, k + ell) * p(k + ell) * q(k))
        for ell in range(1, b + 1):
            for k in range(max(n - ell, 0), n):
                terms.append(-engine.shifted_pq(k + ell, k) * p(k) * q(k + ell))
        rhs = mpmath.fsum(terms) / denominator
        return abs(lhs - rhs)
