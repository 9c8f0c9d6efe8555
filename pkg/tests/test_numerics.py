import cmath
import math
from fractions import Fraction

import mpmath
import pytest

from src.core.errors import BracketFailure, InvalidConfiguration, NonConvergence
from src.numerics.precision import (
    PrecisionContext,
    QuadratureScheme,
    QuadratureSpec,
    equilibrium_quadrature,
    to_mpf,
)
from src.numerics.quadrature import (
    decay_cutoff,
    gauss_legendre_rule,
    integrate_interval,
    integrate_log_singular,
    integrate_semiaxis,
)
from src.numerics.roots import find_root_monotone, newton_complex, solve_2d


# ---- precision --------------------------------------------------------------

def test_precision_context_rejects_short_mantissa():
    with pytest.raises(InvalidConfiguration):
        PrecisionContext(mantissa_bits=32)


def test_to_mpf_keeps_fractions_exact(ctx):
    with ctx.workprec():
        assert to_mpf(Fraction(3, 2)) == mpmath.mpf(3) / 2


def test_quadrature_spec_rejects_bad_tolerances():
    with pytest.raises(InvalidConfiguration):
        QuadratureSpec(abs_tol=0.0)


# ---- half-line quadrature ---------------------------------------------------

@pytest.mark.parametrize("f, expected", [
    (lambda x: mpmath.exp(-x), mpmath.mpf(1)),
    (lambda x: x ** 3 * mpmath.exp(-x), mpmath.mpf(6)),
    (lambda x: mpmath.sqrt(x) * mpmath.exp(-x), mpmath.sqrt(mpmath.pi) / 2),
])
def test_integrate_semiaxis_gamma_values(ctx, f, expected):
    with ctx.workprec():
        value = integrate_semiaxis(f, QuadratureSpec(), ctx)
        assert abs(value - expected) < mpmath.mpf(10) ** -25


def test_gauss_laguerre_path_is_exact_for_polynomial_times_weight(ctx):
    spec = QuadratureSpec(scheme=QuadratureScheme.GAUSS_LAGUERRE, points_per_panel=12)
    with ctx.workprec():
        value = integrate_semiaxis(lambda x: x ** 3 * mpmath.exp(-x), spec, ctx)
        assert abs(value - 6) < mpmath.mpf(10) ** -40


def test_gauss_legendre_rule_integrates_polynomials(ctx):
    nodes, weights = gauss_legendre_rule(10, ctx)
    with ctx.workprec():
        assert abs(mpmath.fsum(weights) - 2) < mpmath.mpf(10) ** -60
        total = mpmath.fsum(w * x ** 18 for x, w in zip(nodes, weights))
        assert abs(total - mpmath.mpf(2) / 19) < mpmath.mpf(10) ** -60


def test_decay_cutoff_grows_with_precision():
    log_f = lambda x: 3.0 * math.log(x) - x
    assert decay_cutoff(log_f, 256) > decay_cutoff(log_f, 53) > 1.0


def test_decay_cutoff_fails_without_decay():
    with pytest.raises(NonConvergence):
        decay_cutoff(lambda x: math.log(x), 53, max_doublings=20)


# ---- finite intervals -------------------------------------------------------

def test_log_singular_interior_point():
    value = integrate_log_singular(lambda y: math.log(abs(y - 0.5)), 0.0, 1.0, 0.5,
                                   equilibrium_quadrature())
    assert value == pytest.approx(-1.0 - math.log(2.0), abs=1e-9)


def test_log_singular_constant():
    assert integrate_log_singular(lambda y: 1.0, 0.0, 1.0, 0.3, equilibrium_quadrature()) == pytest.approx(1.0)


def test_log_singular_endpoint():
    value = integrate_log_singular(lambda y: math.log(y), 0.0, 1.0, 0.0, equilibrium_quadrature())
    assert value == pytest.approx(-1.0, abs=1e-9)


def test_integrate_interval_empty_is_zero():
    assert integrate_interval(lambda y: 1.0, 1.0, 1.0, equilibrium_quadrature()) == 0.0


# ---- roots ------------------------------------------------------------------

@pytest.mark.parametrize("f", [lambda x: x - 2.0, lambda x: x ** 3 - 8.0])
def test_find_root_monotone(f):
    assert find_root_monotone(f, 0.0, 10.0) == pytest.approx(2.0, abs=1e-12)


def test_find_root_expands_bracket():
    assert find_root_monotone(lambda x: x - 50.0, 0.0, 1.0) == pytest.approx(50.0)


def test_find_root_bracket_failure():
    with pytest.raises(BracketFailure):
        find_root_monotone(lambda x: 1.0 + x * x, 0.0, 1.0, max_expansions=5)


def test_solve_2d_linear():
    x, y = solve_2d(lambda x, y: (x - 1.0, y - 2.0), (0.0, 0.0))
    assert (x, y) == pytest.approx((1.0, 2.0), abs=1e-9)


def test_solve_2d_nonlinear():
    x, y = solve_2d(lambda x, y: (x * x - 4.0, x * y - 3.0), (1.0, 1.0))
    assert (x, y) == pytest.approx((2.0, 1.5), abs=1e-8)


def test_newton_complex_square_root_of_minus_one():
    s = newton_complex(lambda s: s * s + 1, lambda s: 2 * s, 0.5 + 0.8j)
    assert abs(s - 1j) < 1e-12


def test_newton_complex_cube_root_of_unity():
    s = newton_complex(lambda s: s ** 3 - 1, lambda s: 3 * s * s, -0.4 + 0.9j)
    assert abs(s - cmath.exp(2j * math.pi / 3)) < 1e-12
