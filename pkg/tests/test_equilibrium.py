import dataclasses
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, stats

from src.conformal.curve import trace_curve
from src.conformal.maps import ConformalMap
from src.core.errors import InvalidConfiguration, InvalidSolution, OutOfRange
from src.equilibrium.classify import classify_edge, locate_critical_rho, two_path_gap
from src.equilibrium.closed_form import (
    laguerre_density,
    laguerre_density_closed_form,
    quadratic_c,
    quadratic_density_hard,
    quadratic_density_soft,
    soft_quadratic_parameters,
)
from src.equilibrium.density import check_log_argument, density_hard, density_soft, edge_constants
from src.equilibrium.measure import (
    Regime,
    euler_lagrange_grids,
    sample_measure,
    total_mass,
    verify_euler_lagrange,
)
from src.equilibrium.resolvent import ResolventData
from src.equilibrium.solver import c_monotonicity_check, solve_c, solve_c0_c1
from src.potentials.potential import Potential

B_LAGUERRE = 3.0 * math.sqrt(3.0)


def slope(f, xs):
    """Least-squares slope of log f against log xs."""
    ys = [math.log(f(float(x))) for x in xs]
    return float(np.polyfit(np.log(xs), ys, 1)[0])


# ---- hard-edge parameter ----------------------------------------------------

@pytest.mark.parametrize("rho, theta, expected", [(1.0, 2.0, 2.0), (2.0, 2.0, 1.0), (1.0, 1.5, 1.5)])
def test_solve_c_laguerre(rho, theta, expected):
    assert solve_c(Potential.linear(rho), theta) == pytest.approx(expected, abs=1e-8)


def test_solve_c_quadratic_matches_residue_formula():
    c = solve_c(Potential.quadratic(1.0, 0.0), 2.0)
    assert c == pytest.approx(quadratic_c(1.0, 0.0, 2.0), abs=1e-8)
    assert c == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-8)


def test_c_monotonicity():
    report = c_monotonicity_check(Potential.linear(1.0), 2.0)
    assert report.increasing
    assert len(report.values) == 25


# ---- Laguerre closed forms --------------------------------------------------

def test_closed_form_against_high_precision():
    x = mpmath.mpf(1)
    root = mpmath.sqrt(1 - x ** 2 / 27)
    expected = mpmath.sqrt(3) * (mpmath.cbrt(1 + root) - mpmath.cbrt(1 - root)) / (2 * mpmath.pi * mpmath.cbrt(x))
    assert laguerre_density_closed_form(1.0, 1.0) == pytest.approx(float(expected), rel=1e-13)


def test_closed_form_has_unit_mass():
    mass, _ = integrate.quad(lambda x: laguerre_density_closed_form(1.0, x), 0.0, B_LAGUERRE, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_closed_form_outside_support():
    with pytest.raises(OutOfRange):
        laguerre_density_closed_form(1.0, 6.0)


def test_general_laguerre_density_at_theta_two():
    for x in np.linspace(0.1, 5.0, 12):
        assert laguerre_density(2.0, 1.0, float(x)) == pytest.approx(
            laguerre_density_closed_form(1.0, float(x)), abs=1e-10)


def test_density_hard_matches_closed_form():
    V = Potential.linear(1.0)
    curve = trace_curve(ConformalMap.hard(2.0, 2.0))
    for x in np.linspace(0.2, 5.0, 8):
        assert density_hard(V, 2.0, 2.0, curve, float(x)) == pytest.approx(
            laguerre_density_closed_form(1.0, float(x)), abs=1e-4)


def test_density_hard_outside_support():
    with pytest.raises(OutOfRange):
        density_hard(Potential.linear(1.0), 2.0, 2.0, None, 6.0)


def test_laguerre_measure_matches_closed_form(laguerre_measure):
    for x, psi in laguerre_measure.psi_grid(40):
        assert psi == pytest.approx(laguerre_density_closed_form(1.0, x), abs=1e-5)


def test_measures_use_quadrature_density(laguerre_measure, soft_measure):
    assert laguerre_measure.density.psi_exact.func is density_hard
    assert soft_measure.density.psi_exact.func is density_soft


def test_quadrature_and_n_inside_densities_agree(soft_measure):
    assert two_path_gap(soft_measure) <= 1e-6


def test_two_path_gap_needs_polynomial_potential(laguerre_measure):
    custom = Potential.custom(lambda x: x, lambda x: 1.0, lambda x: 0.0)
    with pytest.raises(InvalidConfiguration):
        two_path_gap(dataclasses.replace(laguerre_measure, potential=custom))


# ---- quadratic V ------------------------------------------------------------

def test_quadratic_hard_density_agrees_with_quadrature():
    V = Potential.quadratic(1.0, 0.0)
    c = quadratic_c(1.0, 0.0, 2.0)
    curve = trace_curve(ConformalMap.hard(2.0, c))
    b = 3.0 * math.sqrt(3.0) * c / 2.0
    for x in np.linspace(0.05 * b, 0.95 * b, 8):
        closed = quadratic_density_hard(1.0, 0.0, 2.0, c, curve, float(x))
        assert density_hard(V, 2.0, c, curve, float(x)) == pytest.approx(closed, abs=1e-8)


def test_hard_candidate_negative_past_transition():
    c = quadratic_c(1.0, -2.5, 2.0)
    b = 3.0 * math.sqrt(3.0) * c / 2.0
    assert quadratic_density_hard(1.0, -2.5, 2.0, c, None, 1e-4 * b) < 0.0


def test_soft_quadratic_parameters():
    assert soft_quadratic_parameters(-3.0) == pytest.approx((1.5, 2.0 / 3.0))
    assert soft_quadratic_parameters(-4.0) == pytest.approx((2.0, 0.5))
    with pytest.raises(OutOfRange):
        soft_quadratic_parameters(-1.0)


def test_soft_density_agrees_with_quadrature(soft_measure):
    V = Potential.quadratic(1.0, -3.0)
    a, b = soft_measure.support
    for x in np.linspace(a, b, 7)[1:-1]:
        closed = quadratic_density_soft(-3.0, soft_measure.curve, float(x))
        quad = density_soft(V, 2.0, 1.5, 2.0 / 3.0, soft_measure.curve, float(x))
        assert quad == pytest.approx(closed, abs=1e-6)


def test_solve_c0_c1_near_answer():
    c0, c1 = solve_c0_c1(Potential.quadratic(1.0, -4.0), 2.0, (1.9, 0.55))
    assert (c0, c1) == pytest.approx((2.0, 0.5), abs=1e-6)


def test_solve_c0_c1_rejects_inadmissible_guess():
    with pytest.raises(InvalidSolution):
        solve_c0_c1(Potential.quadratic(1.0, -3.0), 2.0, (0.5, 1.0))


# ---- classification ---------------------------------------------------------

def test_laguerre_is_hard_edge(laguerre_measure):
    assert laguerre_measure.regime is Regime.HARD_EDGE
    a, b = laguerre_measure.support
    assert a == 0.0
    assert b == pytest.approx(B_LAGUERRE, abs=1e-8)
    d1, d2 = laguerre_measure.edge_constants
    assert d1 > 0.0 and d2 > 0.0


def test_quadratic_rho_zero_is_hard_edge():
    assert classify_edge(Potential.quadratic(1.0, 0.0), 2.0).regime is Regime.HARD_EDGE


def test_soft_edge_measure(soft_measure):
    assert soft_measure.regime is Regime.SOFT_EDGE
    c0, c1 = soft_measure.map.parameters()
    assert (c0, c1) == pytest.approx((1.5, 2.0 / 3.0), abs=1e-6)
    a, b = soft_measure.support
    assert 0.0 < a < b
    assert soft_measure.edge_constants[0] < 0.0


@pytest.mark.slow
def test_critical_edge_at_transition():
    measure = classify_edge(Potential.quadratic(1.0, -2.0), 2.0)
    assert measure.regime is Regime.CRITICAL_EDGE
    b = measure.support[1]
    xs = np.geomspace(1e-4 * b, 1e-3 * b, 6)
    assert slope(measure.density.psi_exact, xs) == pytest.approx(1.0 / 3.0, abs=0.05)


@pytest.mark.slow
def test_locate_critical_rho():
    assert locate_critical_rho(2.0) == pytest.approx(-2.0, abs=0.05)


def test_classification_summary(soft_measure):
    summary = soft_measure.summary()
    assert summary["regime"] == "soft"
    assert set(summary) == {"regime", "a", "b", "c_or_c0", "c1", "d1", "d2", "ell"}


# ---- edge behaviour ---------------------------------------------------------

@pytest.mark.parametrize("theta", [1.5, 2.0, 3.0])
def test_hard_edge_exponent(theta):
    measure = classify_edge(Potential.linear(1.0), theta)
    b = measure.support[1]
    xs = np.geomspace(1e-8 * b, 1e-5 * b, 6)
    assert slope(measure.density.psi_exact, xs) == pytest.approx(-1.0 / (theta + 1.0), abs=0.02)


def test_square_root_vanishing_at_b(laguerre_measure):
    b = laguerre_measure.support[1]
    _, d2 = laguerre_measure.edge_constants
    eps = 1e-6 * b
    assert laguerre_measure.density.psi_exact(b - eps) / math.sqrt(eps) == pytest.approx(d2, rel=0.05)


def test_soft_edges_vanish_like_square_root(soft_measure):
    a, b = soft_measure.support
    psi = soft_measure.density.psi_exact
    width = b - a
    gaps = np.geomspace(1e-7 * width, 1e-5 * width, 5)
    assert slope(lambda g: psi(b - g), gaps) == pytest.approx(0.5, abs=0.05)
    assert slope(lambda g: psi(a + g), gaps) == pytest.approx(0.5, abs=0.05)


def test_edge_constants_laguerre():
    d1, d2 = edge_constants(Potential.linear(1.0), 2.0, 2.0)
    assert d1 > 0.0 and d2 > 0.0


# ---- mass and positivity ----------------------------------------------------

@pytest.mark.parametrize("fixture", ["laguerre_measure", "soft_measure"])
def test_unit_mass(fixture, request):
    assert total_mass(request.getfixturevalue(fixture)) == pytest.approx(1.0, abs=1e-6)


def test_unit_mass_theta_one():
    measure = classify_edge(Potential.linear(1.0), 1.0)
    assert measure.support[1] == pytest.approx(4.0, abs=1e-8)
    assert total_mass(measure) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("fixture", ["laguerre_measure", "soft_measure"])
def test_density_nonnegative(fixture, request):
    measure = request.getfixturevalue(fixture)
    assert min(psi for _, psi in measure.psi_grid(200)) >= -1e-10


def test_cdf_and_quantile(laguerre_measure):
    density = laguerre_measure.density
    assert density.cdf(0.0) == 0.0
    assert density.cdf(B_LAGUERRE + 1.0) == pytest.approx(1.0, abs=1e-6)
    cdf = density.cdf_array(np.linspace(0.0, B_LAGUERRE, 100))
    assert np.all(np.diff(cdf) >= 0.0)
    x = density.quantile(0.3)
    assert density.cdf(x) / density.total_mass == pytest.approx(0.3, abs=1e-8)


def test_sample_measure_follows_cdf(soft_measure):
    rng = np.random.Generator(np.random.PCG64(5))
    draws = sample_measure(soft_measure, 100_000, rng)
    assert stats.kstest(draws, soft_measure.density.cdf_array).statistic <= 0.01


# ---- variational conditions -------------------------------------------------

@pytest.mark.parametrize("fixture", ["laguerre_measure", "soft_measure"])
def test_euler_lagrange(fixture, request):
    measure = request.getfixturevalue(fixture)
    grid_in, grid_out = euler_lagrange_grids(measure)
    report = verify_euler_lagrange(measure, grid_in, grid_out)
    assert report.max_dev_on_support <= 1e-4
    assert report.min_slack_off_support > 0.0
    assert measure.lagrange_ell == report.ell_estimate


def test_euler_lagrange_grids(soft_measure, laguerre_measure):
    grid_in, grid_out = euler_lagrange_grids(soft_measure, 10)
    a, b = soft_measure.support
    assert len(grid_in) == 10 and np.all((grid_in > a) & (grid_in < b))
    assert grid_out[-1] == pytest.approx(0.5 * a)
    _, hard_out = euler_lagrange_grids(laguerre_measure)
    assert len(hard_out) == 3


def test_log_argument_exceeds_one(laguerre_measure):
    xs = np.linspace(0.1, 5.0, 10)
    ys = np.linspace(0.15, 5.1, 10)
    report = check_log_argument(laguerre_measure.map, laguerre_measure.curve, xs, ys)
    assert report.passed
    assert report.pairs == 100


# ---- Cauchy-integral representation -----------------------------------------

def test_resolvent_conditions_hard(laguerre_measure):
    data = ResolventData(laguerre_measure.map, laguerre_measure.curve, laguerre_measure.potential)
    checks = data.conditions()
    assert checks["n_at_zero"].real == pytest.approx(2.0, abs=1e-8)
    assert checks["n_at_far"].real == pytest.approx(1.0, abs=1e-5)
    assert "n_at_minus_one" not in checks


def test_resolvent_conditions_soft(soft_measure):
    data = ResolventData(soft_measure.map, soft_measure.curve, soft_measure.potential)
    checks = data.conditions()
    assert checks["n_at_zero"].real == pytest.approx(2.0, abs=1e-6)
    assert abs(checks["n_at_minus_one"]) <= 1e-6


def test_resolvent_jump_condition(laguerre_measure):
    data = ResolventData(laguerre_measure.map, laguerre_measure.curve, laguerre_measure.potential)
    assert abs(data.boundary_sum(math.pi / 2)) <= 1e-7
