"""Bimoments m_jk = int_0^inf x^{k + j theta} w(x) dx, Hankel-type determinants
and partition functions, all in arbitrary precision."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

import mpmath
import numpy as np

from src.bimoments.config import tensorRuleDefaults
from src.core.errors import InvalidConfiguration, NonPositive
from src.numerics.precision import PrecisionContext, QuadratureScheme, QuadratureSpec, to_mpf
from src.numerics.quadrature import decay_cutoff, integrate_semiaxis, semiaxis_rule, tensor_semiaxis
from src.potentials.potential import Weight
from src.utils.io_utils import write_csv

logger = logging.getLogger(__name__)

Theta = Union[Fraction, float]

# Users raising jmax should raise mantissa_bits too (about 8-10 bits per degree)
DEFAULT_JMAX = 30


@dataclass(frozen=True)
class BimomentTable:
    theta: Theta
    weight: Weight
    entries: Tuple[Tuple, ...]
    ctx: PrecisionContext

    @property
    def jmax(self) -> int:
        return len(self.entries) - 1

    def m(self, j: int, k: int):
        return self.entries[j][k]

    def block(self, n: int) -> mpmath.matrix:
        """Leading n x n block, rows indexed by j (powers of x^theta)."""
        with self.ctx.workprec():
            out = mpmath.matrix(n, n)
            for j in range(n):
                for k in range(n):
                    out[j, k] = self.entries[j][k]
            return out


def _gamma_bimoment(w: Weight, theta: Theta, j: int, k: int):
    s = k + j * to_mpf(theta) + to_mpf(w.alpha) + 1
    return mpmath.gamma(s) / (w.n_scale * to_mpf(w.potential.rho)) ** s


def bimoment(w: Weight, theta: Theta, j: int, k: int, ctx: PrecisionContext,
             spec: Optional[QuadratureSpec] = None, closed_form: bool = True):
    """m_jk by the Gamma closed form for linear V, by half-line quadrature otherwise."""
    if j < 0 or k < 0:
        raise ValueError(f"bimoment indices must be non-negative, got ({j}, {k})")
    with ctx.workprec():
        if closed_form and w.is_laguerre_type:
            return _gamma_bimoment(w, theta, j, k)
        power = k + j * to_mpf(theta)
        return integrate_semiaxis(lambda x: x ** power * w.evaluate(x), spec or QuadratureSpec(), ctx)


def _log_integrand(w: Weight, power: float):
    def log_f(x: float) -> float:
        return power * math.log(x) + float(w.log_weight(x))
    return log_f


def build_table(w: Weight, theta: Theta, jmax: int = DEFAULT_JMAX,
                ctx: Optional[PrecisionContext] = None,
                spec: Optional[QuadratureSpec] = None) -> BimomentTable:
    """All m_jk for 0 <= j, k <= jmax.

    Non-linear potentials share one graded Gauss-Legendre rule across entries.
    """
    ctx = ctx or PrecisionContext()
    size = jmax + 1
    with ctx.workprec():
        if w.is_laguerre_type:
            rows = tuple(tuple(_gamma_bimoment(w, theta, j, k) for k in range(size))
                         for j in range(size))
        else:
            spec = spec or QuadratureSpec(scheme=QuadratureScheme.GAUSS_LEGENDRE_PANELS)
            max_power = jmax * (1 + float(theta))
            cutoff = decay_cutoff(_log_integrand(w, max_power), ctx.mantissa_bits)
            rule = semiaxis_rule(spec, ctx, cutoff)
            th = to_mpf(theta)
            acc = [[mpmath.mpf(0)] * size for _ in range(size)]
            for x, weight in zip(rule.nodes, rule.weights):
                base = weight * w.evaluate(x)
                x_theta = x ** th
                row = base
                for j in range(size):
                    term = row
                    for k in range(size):
                        acc[j][k] += term
                        term *= x
                    row *= x_theta
            rows = tuple(tuple(r) for r in acc)
            logger.info("built %dx%d bimoment table on %d nodes (cutoff %.3g)",
                        size, size, len(rule.nodes), cutoff)
    return BimomentTable(theta=theta, weight=w, entries=rows, ctx=ctx)


def hankel_det(table: BimomentTable, n: int):
    """H_n = det(m_jk)_{j,k<n}; must be positive."""
    if n > table.jmax + 1:
        raise ValueError(f"n={n} exceeds table size {table.jmax + 1}")
    if n == 0:
        return mpmath.mpf(1)
    with table.ctx.workprec():
        value = mpmath.det(table.block(n))
    if value <= 0:
        raise NonPositive(
            f"H_{n} = {mpmath.nstr(value, 10)} is not positive at {table.ctx.mantissa_bits} bits"
        )
    return value


def partition_function(table: BimomentTable, n: int):
    """Z_n = n! H_n."""
    with table.ctx.workprec():
        return mpmath.factorial(n) * hankel_det(table, n)


def partition_function_tensor(w: Weight, theta: Theta, n: int = 2) -> float:
    """Z_n as the n-fold integral of prod w(x_i) Delta(x) Delta(x^theta), tensor rule."""
    settings = tensorRuleDefaults()
    limit = settings.pop("max_particles")
    if not 1 <= n <= limit:
        raise InvalidConfiguration(f"tensor partition function covers 1 <= n <= {limit}, got {n}")
    th = float(theta)
    power = (n - 1) * (1.0 + th)
    log_f = lambda x: power * math.log(x) + float(w.log_weight(x))
    rule = semiaxis_rule(QuadratureSpec(**settings), PrecisionContext(mantissa_bits=64),
                         decay_cutoff(log_f, 53))

    def integrand(*xs):
        value = np.ones_like(xs[0])
        for x in xs:
            value = value * w.evaluate(x)
        for i in range(n):
            for j in range(i + 1, n):
                value = value * (xs[j] - xs[i]) * (xs[j] ** th - xs[i] ** th)
        return value

    return tensor_semiaxis(integrand, n, rule)


def table_rows(table: BimomentTable):
    """(j, k, m_jk) rows in row-major order."""
    for j, row in enumerate(table.entries):
        for k, value in enumerate(row):
            yield j, k, value


def write_table_csv(table: BimomentTable, path: Optional[str], config: dict) -> int:
    return write_csv(path, ("j", "k", "m_jk"), table_rows(table), config)
