from dataclasses import replace
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from src.biorthogonal.recurrence import recurrence_coeffs, recurrence_residuals, verify_cd
from src.biorthogonal.system import (
    build_system,
    check_interlacing,
    eval_poly,
    kernel,
    kernel_reproducing_residual,
    kernel_trace,
    poly_via_determinant,
    poly_via_integral,
    polynomial_zeros,
    verify_orthogonality,
)
from src.core.errors import DegeneratePoint, IrrationalTheta
from src.potentials.potential import Weight


def close(a, b, tol):
    return abs(a - b) <= tol


# ---- construction -----------------------------------------------------------

def test_degree_zero_normalization(laguerre_system):
    assert close(laguerre_system.kappa[0], 1, 1e-60)
    assert close(eval_poly(laguerre_system, "p", 0, 17.0), laguerre_system.kappa[0], 1e-60)


def test_first_polynomials(laguerre_system):
    p1 = laguerre_system.coeffs("p", 1)
    q1 = laguerre_system.coeffs("q", 1)
    assert close(p1[0], -0.5, 1e-60) and close(p1[1], 0.5, 1e-60)
    assert close(q1[0], -1, 1e-60) and close(q1[1], 0.5, 1e-60)
    assert close(laguerre_system.kappa[1], 0.5, 1e-60)


def test_first_polynomial_roots(laguerre_system):
    assert close(eval_poly(laguerre_system, "p", 1, 1), 0, 1e-60)
    assert close(eval_poly(laguerre_system, "q", 1, 2), 0, 1e-60)


def test_negative_index_is_zero(laguerre_system):
    assert eval_poly(laguerre_system, "p", -1, 3.0) == 0


def test_orthogonality(laguerre_system):
    assert verify_orthogonality(laguerre_system) <= 1e-20


def test_orthogonality_detects_perturbation(laguerre_system):
    p3 = list(laguerre_system.p_coeffs[3])
    p3[1] += mpmath.mpf("1e-3")
    p_coeffs = laguerre_system.p_coeffs[:3] + (tuple(p3),) + laguerre_system.p_coeffs[4:]
    broken = replace(laguerre_system, p_coeffs=p_coeffs)
    assert verify_orthogonality(broken) >= 1e-4


# ---- oracles ----------------------------------------------------------------

def test_determinant_oracle_small_values(laguerre_system):
    table = laguerre_system.table
    with table.ctx.workprec():
        assert close(poly_via_determinant(table, "p", 0, 5.0), 1, 1e-60)
        assert close(poly_via_determinant(table, "p", 1, 3.0), 1, 1e-60)
        assert close(poly_via_determinant(table, "q", 1, 0.0), -1, 1e-60)


@pytest.mark.parametrize("kind", ["p", "q"])
def test_determinant_oracle_agrees_with_construction(laguerre_system, kind):
    for j in range(9):
        for x in (0.3, 2.0, 7.5):
            direct = eval_poly(laguerre_system, kind, j, x)
            oracle = poly_via_determinant(laguerre_system.table, kind, j, x)
            assert abs(direct - oracle) <= 1e-15 * max(1, abs(direct))


def test_integral_oracle_root_of_p1():
    assert poly_via_integral(Weight(), Fraction(2), 1, 1.0) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("j, x", [(1, 3.0), (2, 0.0), (2, 1.7)])
def test_integral_oracle_agrees_with_construction(laguerre_system, j, x):
    direct = float(eval_poly(laguerre_system, "p", j, x))
    assert poly_via_integral(Weight(), Fraction(2), j, x) == pytest.approx(direct, rel=1e-6, abs=1e-8)


# ---- kernel -----------------------------------------------------------------

def test_kernel_n1(laguerre_system):
    value = kernel(laguerre_system, 1, 1.3, 0.7)
    assert float(value) == pytest.approx(np.exp(-1.0), rel=1e-14)


def test_kernel_trace(laguerre_system):
    assert float(kernel_trace(laguerre_system, 3)) == pytest.approx(3.0, rel=1e-8)


def test_kernel_reproducing(laguerre_system):
    assert kernel_reproducing_residual(laguerre_system, 4, 1.3, 0.7) <= 1e-6


# ---- zeros ------------------------------------------------------------------

def test_zeros_interlace(laguerre_system):
    assert check_interlacing(laguerre_system, 8)
    zeros = polynomial_zeros(laguerre_system, "p", 1)
    assert zeros == pytest.approx([1.0])


# ---- recurrences ------------------------------------------------------------

@pytest.mark.parametrize("fixture", ["laguerre_system", "laguerre_system_3_2"])
def test_recurrence_residuals(fixture, request):
    system = request.getfixturevalue(fixture)
    a, b = system.theta_rational
    for k in range(system.jmax - max(a, b) + 1):
        if k > 6:
            break
        p_res, q_res, sym = recurrence_residuals(system, k)
        assert p_res <= 1e-15 and q_res <= 1e-15 and sym <= 1e-15


def test_recurrence_has_a_plus_b_plus_one_terms(laguerre_system_3_2):
    rc = recurrence_coeffs(laguerre_system_3_2, 3)
    assert len(rc.u) == len(rc.v) == 6


def test_recurrence_symmetry_at_k3(laguerre_system_3_2):
    a, b = 3, 2
    u = recurrence_coeffs(laguerre_system_3_2, 3).u
    for j in range(a + b + 1):
        partner = 3 + a - j
        if partner + max(a, b) > laguerre_system_3_2.jmax:
            continue
        v = recurrence_coeffs(laguerre_system_3_2, partner).v
        assert abs(u[j] - v[a + b - j]) <= 1e-15


def test_recurrence_needs_rational_theta(ctx):
    system = build_system(Weight(), 2.5, 4, ctx)
    with pytest.raises(IrrationalTheta):
        recurrence_coeffs(system, 0)


# ---- Christoffel-Darboux ----------------------------------------------------

def test_cd_fixed_point(laguerre_system):
    assert verify_cd(laguerre_system, 5, 2.0, 1.0) <= 1e-20


def test_cd_n1(laguerre_system):
    assert verify_cd(laguerre_system, 1, 0.8, 3.1) <= 1e-20


def test_cd_spot_point(laguerre_system):
    assert verify_cd(laguerre_system, 4, 1.3, 0.7) <= 1e-20


@pytest.mark.parametrize("fixture", ["laguerre_system", "laguerre_system_3_2"])
def test_cd_random_points(fixture, request):
    system = request.getfixturevalue(fixture)
    rng = np.random.Generator(np.random.PCG64(11))
    worst = 0
    for i, (x, y) in enumerate(rng.uniform(0.0, 5.0, (100, 2))):
        n = 1 + i % 8
        worst = max(worst, verify_cd(system, n, float(x), float(y)))
    assert worst <= 1e-16


def test_cd_degenerate_pair(laguerre_system):
    with pytest.raises(DegeneratePoint):
        verify_cd(laguerre_system, 3, 1.5, 1.5)
