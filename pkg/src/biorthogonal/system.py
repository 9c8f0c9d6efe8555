"""Biorthogonal families p_j, q_j with int p_j(x) q_k(x^theta) w(x) dx = delta_jk.

Coefficients come from an LDU factorization of the transposed bimoment
block A[r][s] = m_{s r} = int x^{r + theta s} w(x) dx:

    A = L D U,  p-rows = kappa * L^{-1},  q-rows = kappa * (U^{-1})^T,
    kappa_j = D_j^{-1/2} = (H_j / H_{j+1})^{1/2}.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from src.bimoments.moments import BimomentTable, Theta, build_table, hankel_det
from src.biorthogonal.config import (
    biorthogonalDefaults,
    innerProductRuleDefaults,
    integralOracleRuleDefaults,
)
from src.core.errors import NonPositive, PrecisionExhausted
from src.numerics.precision import PrecisionContext, QuadratureSpec, to_mpf
from src.numerics.quadrature import SemiAxisRule, decay_cutoff, semiaxis_rule, tensor_semiaxis
from src.potentials.potential import Weight

logger = logging.getLogger(__name__)

_DEFAULTS = biorthogonalDefaults()


@dataclass(frozen=True)
class BiorthogonalSystem:
    theta: Theta
    theta_rational: Optional[Tuple[int, int]]
    table: BimomentTable
    p_coeffs: Tuple[Tuple, ...]
    q_coeffs: Tuple[Tuple, ...]
    kappa: Tuple

    @property
    def jmax(self) -> int:
        return len(self.kappa) - 1

    @property
    def ctx(self) -> PrecisionContext:
        return self.table.ctx

    @property
    def weight(self) -> Weight:
        return self.table.weight

    def coeffs(self, kind: str, j: int) -> Tuple:
        if kind == "p":
            return self.p_coeffs[j]
        if kind == "q":
            return self.q_coeffs[j]
        raise ValueError(f"kind must be 'p' or 'q', got {kind!r}")


def rational_parts(theta: Theta) -> Optional[Tuple[int, int]]:
    """(a, b) with theta = a/b when theta is an exact fraction, else None."""
    if isinstance(theta, Fraction):
        return theta.numerator, theta.denominator
    if isinstance(theta, int):
        return theta, 1
    return None


def _ldu(A: mpmath.matrix, n: int):
    """Doolittle LDU without pivoting (all leading minors are positive)."""
    L = mpmath.eye(n)
    U = mpmath.zeros(n, n)
    for i in range(n):
        for k in range(i, n):
            U[i, k] = A[i, k] - mpmath.fsum(L[i, s] * U[s, k] for s in range(i))
        if U[i, i] <= 0:
            raise NonPositive(f"pivot {i} is {mpmath.nstr(U[i, i], 5)}; raise mantissa_bits")
        for r in range(i + 1, n):
            L[r, i] = (A[r, i] - mpmath.fsum(L[r, s] * U[s, i] for s in range(i))) / U[i, i]
    D = [U[i, i] for i in range(n)]
    for i in range(n):
        for k in range(i, n):
            U[i, k] /= D[i]
    return L, D, U


def _unit_lower_inverse(L: mpmath.matrix, n: int) -> mpmath.matrix:
    inv = mpmath.eye(n)
    for i in range(n):
        for j in range(i):
            inv[i, j] = -mpmath.fsum(L[i, s] * inv[s, j] for s in range(j, i))
    return inv


def bimoment_residual(P: Sequence[Sequence], Q: Sequence[Sequence], table: BimomentTable):
    """max |<p_j, q_k> - delta_jk| evaluated by exact bimoment algebra."""
    n = len(P)
    worst = mpmath.mpf(0)
    for j in range(n):
        for k in range(n):
            value = mpmath.fsum(
                P[j][r] * Q[k][s] * table.m(s, r)
                for r in range(len(P[j])) for s in range(len(Q[k]))
            )
            worst = max(worst, abs(value - (1 if j == k else 0)))
    return worst


def build_system(w: Weight, theta: Theta, jmax: int = _DEFAULTS["jmax"],
                 ctx: Optional[PrecisionContext] = None,
                 table: Optional[BimomentTable] = None) -> BiorthogonalSystem:
    ctx = ctx or (table.ctx if table is not None else PrecisionContext())
    table = table or build_table(w, theta, jmax, ctx)
    n = jmax + 1
    with ctx.workprec():
        A = mpmath.matrix(n, n)
        for r in range(n):
            for s in range(n):
                A[r, s] = table.m(s, r)
        L, D, U = _ldu(A, n)
        L_inv = _unit_lower_inverse(L, n)
        # (U^{-1})^T is the inverse of the unit lower triangle U^T
        Ut_inv = _unit_lower_inverse(U.T, n)
        kappa = tuple(1 / mpmath.sqrt(d) for d in D)
        p_rows = tuple(tuple(kappa[j] * L_inv[j, i] for i in range(j + 1)) for j in range(n))
        q_rows = tuple(tuple(kappa[j] * Ut_inv[j, i] for i in range(j + 1)) for j in range(n))
        residual = bimoment_residual(p_rows, q_rows, table)
    logger.info("built biorthogonal system jmax=%d theta=%s, residual %s",
                jmax, theta, mpmath.nstr(residual, 3))
    if residual > _DEFAULTS["residual_limit"]:
        raise PrecisionExhausted(
            f"orthogonality residual {mpmath.nstr(residual, 3)} at {ctx.mantissa_bits} bits; "
            "raise mantissa_bits or lower jmax"
        )
    return BiorthogonalSystem(theta=theta, theta_rational=rational_parts(theta), table=table,
                              p_coeffs=p_rows, q_coeffs=q_rows, kappa=kappa)


def horner(coeffs: Sequence, x):
    result = mpmath.mpf(0)
    for c in reversed(coeffs):
        result = result * x + c
    return result


def as_mp(x):
    if isinstance(x, complex):
        return mpmath.mpc(x)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    return to_mpf(x) if isinstance(x, Fraction) else mpmath.mpf(x)


def eval_poly(sys: BiorthogonalSystem, kind: str, j: int, x):
    """p_j(x) or q_j(x); negative indices give 0."""
    if j < 0:
        return mpmath.mpf(0)
    with sys.ctx.workprec():
        return horner(sys.coeffs(kind, j), as_mp(x))


def eval_all(sys: BiorthogonalSystem, kind: str, x, upto: Optional[int] = None) -> List:
    upto = sys.jmax if upto is None else upto
    with sys.ctx.workprec():
        x = as_mp(x)
        return [horner(sys.coeffs(kind, j), x) for j in range(upto + 1)]


def poly_via_determinant(table: BimomentTable, kind: str, j: int, x):
    """Bordered-determinant value of p_j(x) or q_j(x)."""
    if j > table.jmax:
        raise ValueError(f"j={j} exceeds jmax={table.jmax}")
    with table.ctx.workprec():
        x = as_mp(x)
        B = mpmath.matrix(j + 1, j + 1)
        for i in range(j + 1):
            for k in range(j + 1):
                if kind == "p":
                    B[i, k] = x ** k if i == j else table.m(i, k)
                elif kind == "q":
                    B[i, k] = x ** i if k == j else table.m(i, k)
                else:
                    raise ValueError(f"kind must be 'p' or 'q', got {kind!r}")
        norm = mpmath.sqrt(hankel_det(table, j) * hankel_det(table, j + 1))
        return mpmath.det(B) / norm


def _oracle_rule(w: Weight, theta: Theta, power: float) -> SemiAxisRule:
    spec = QuadratureSpec(**integralOracleRuleDefaults())
    ctx = PrecisionContext(mantissa_bits=64)
    log_f = lambda x: power * math.log(x) + float(w.log_weight(x))
    return semiaxis_rule(spec, ctx, decay_cutoff(log_f, 53))


def poly_via_integral(w: Weight, theta: Theta, j: int, x: float, kind: str = "p") -> float:
    """Multiple-integral value of p_j(x), or of q_j(x**theta) for kind='q' (j <= 2)."""
    if j not in (0, 1, 2):
        raise ValueError("the multiple-integral oracle covers j in {0, 1, 2}")
    table = build_table(w, theta, j, PrecisionContext(mantissa_bits=128))
    norm = float(mpmath.sqrt(hankel_det(table, j) * hankel_det(table, j + 1)))
    if j == 0:
        return 1.0 / norm
    th = float(theta)
    shift = lambda t: (x ** th - t ** th) if kind == "q" else (x - t)

    def integrand(*ts):
        value = np.ones_like(ts[0])
        for t in ts:
            value = value * shift(t) * w.evaluate(t)
        if len(ts) == 2:
            value = value * (ts[1] - ts[0]) * (ts[1] ** th - ts[0] ** th)
        return value

    rule = _oracle_rule(w, theta, 2.0 + 2.0 * th)
    return tensor_semiaxis(integrand, j, rule) / (math.factorial(j) * norm)


def kernel(sys: BiorthogonalSystem, n: int, x, y):
    """K_n(x, y) = sum_{j<n} p_j(x) q_j(y^theta) sqrt(w(x) w(y))."""
    if n > sys.jmax + 1:
        raise ValueError(f"n={n} exceeds jmax+1={sys.jmax + 1}")
    with sys.ctx.workprec():
        x, y = as_mp(x), as_mp(y)
        y_theta = y ** to_mpf(sys.theta)
        total = mpmath.fsum(horner(sys.p_coeffs[j], x) * horner(sys.q_coeffs[j], y_theta)
                            for j in range(n))
        return total * mpmath.sqrt(sys.weight.evaluate(x) * sys.weight.evaluate(y))


# ============================================================================
# QUADRATURE CHECKS
# ============================================================================

@lru_cache(maxsize=8)
def _x_rule(sys: BiorthogonalSystem) -> SemiAxisRule:
    power = sys.jmax * (1.0 + float(sys.theta))
    log_f = lambda x: power * math.log(x) + float(sys.weight.log_weight(x))
    spec = QuadratureSpec(**innerProductRuleDefaults())
    return semiaxis_rule(spec, sys.ctx, decay_cutoff(log_f, sys.ctx.mantissa_bits))


def _node_tables(sys: BiorthogonalSystem):
    rule = _x_rule(sys)
    with sys.ctx.workprec():
        th = to_mpf(sys.theta)
        rows = []
        for x, weight in zip(rule.nodes, rule.weights):
            rows.append((weight * sys.weight.evaluate(x),
                         eval_all(sys, "p", x), eval_all(sys, "q", x ** th)))
    return rows


def verify_orthogonality(sys: BiorthogonalSystem):
    """max_{j,k} |<p_j, q_k> - delta_jk| by quadrature on the x-axis."""
    rows = _node_tables(sys)
    n = sys.jmax + 1
    with sys.ctx.workprec():
        gram = [[mpmath.mpf(0)] * n for _ in range(n)]
        for weight, ps, qs in rows:
            for j in range(n):
                wp = weight * ps[j]
                for k in range(n):
                    gram[j][k] += wp * qs[k]
        return max(abs(gram[j][k] - (1 if j == k else 0)) for j in range(n) for k in range(n))


def kernel_trace(sys: BiorthogonalSystem, n: int):
    """int_0^inf K_n(x, x) dx, which equals n."""
    rule = _x_rule(sys)
    with sys.ctx.workprec():
        th = to_mpf(sys.theta)
        return mpmath.fsum(
            weight * sys.weight.evaluate(x) * mpmath.fsum(
                horner(sys.p_coeffs[j], x) * horner(sys.q_coeffs[j], x ** th) for j in range(n))
            for x, weight in zip(rule.nodes, rule.weights)
        )


def kernel_reproducing_residual(sys: BiorthogonalSystem, n: int, x, y):
    """Relative gap between int K_n(x,z) K_n(z,y) dz and K_n(x,y)."""
    rule = _x_rule(sys)
    with sys.ctx.workprec():
        composed = mpmath.fsum(weight * kernel(sys, n, x, z) * kernel(sys, n, z, y)
                               for z, weight in zip(rule.nodes, rule.weights))
        direct = kernel(sys, n, x, y)
        return abs(composed - direct) / abs(direct)


# ============================================================================
# ZEROS
# ============================================================================

def polynomial_zeros(sys: BiorthogonalSystem, kind: str, j: int) -> List[float]:
    """Zeros of p_j (or q_j), sorted; complex parts must vanish."""
    if j == 0:
        return []
    with sys.ctx.workprec():
        coeffs = list(reversed(sys.coeffs(kind, j)))
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=2 * sys.ctx.mantissa_bits)
    if j == 1:
        roots = [roots] if not isinstance(roots, (list, tuple)) else roots
    out = []
    for r in roots:
        if abs(mpmath.im(r)) > 1e-20 * max(1, abs(r)):
            raise PrecisionExhausted(f"non-real zero {r} of {kind}_{j}")
        out.append(float(mpmath.re(r)))
    return sorted(out)


def check_interlacing(sys: BiorthogonalSystem, upto: int = 8) -> bool:
    """Zeros of p_j are positive, simple and interlace with those of p_{j-1}."""
    previous = []
    for j in range(1, min(upto, sys.jmax) + 1):
        zeros = polynomial_zeros(sys, "p", j)
        if zeros[0] <= 0 or any(b - a <= 0 for a, b in zip(zeros, zeros[1:])):
            return False
        for i, z in enumerate(previous):
            if not zeros[i] < z < zeros[i + 1]:
                return False
        previous = zeros
    return True
