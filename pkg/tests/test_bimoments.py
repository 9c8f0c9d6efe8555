from fractions import Fraction

import mpmath
import pytest

from src.bimoments.moments import (
    bimoment,
    build_table,
    hankel_det,
    partition_function,
    partition_function_tensor,
    table_rows,
    write_table_csv,
)
from src.core.errors import InvalidConfiguration, NonPositive
from src.potentials.potential import Potential, Weight


@pytest.fixture(scope="module")
def table(ctx):
    return build_table(Weight(), Fraction(2), 4, ctx)


@pytest.mark.parametrize("j, k, expected", [(0, 0, 1), (1, 1, 6), (1, 0, 2)])
def test_laguerre_bimoments(table, j, k, expected):
    assert table.m(j, k) == expected


def test_quadrature_bimoment_matches_gamma(ctx):
    with ctx.workprec():
        value = bimoment(Weight(), Fraction(2), 1, 1, ctx, closed_form=False)
        assert abs(value - 6) < mpmath.mpf(10) ** -25


def test_rational_theta_gamma_exponent(ctx):
    with ctx.workprec():
        value = bimoment(Weight(), Fraction(3, 2), 1, 0, ctx)
        assert abs(value - mpmath.gamma(mpmath.mpf(5) / 2)) < mpmath.mpf(10) ** -60


@pytest.mark.parametrize("n, expected", [(0, 1), (1, 1), (2, 4)])
def test_hankel_det(table, n, expected):
    assert abs(hankel_det(table, n) - expected) < mpmath.mpf(10) ** -60


@pytest.mark.parametrize("n, expected", [(0, 1), (1, 1), (2, 8)])
def test_partition_function(table, n, expected):
    assert abs(partition_function(table, n) - expected) < mpmath.mpf(10) ** -60


@pytest.mark.parametrize("theta", [Fraction(2), Fraction(3, 2)])
def test_partition_function_matches_tensor_integral(ctx, theta):
    table = build_table(Weight(), theta, 2, ctx)
    exact = float(partition_function(table, 2))
    assert partition_function_tensor(Weight(), theta, 2) == pytest.approx(exact, rel=1e-8)


def test_partition_function_tensor_for_quadratic_potential(ctx):
    w = Weight(potential=Potential.quadratic(1.0, -1.0))
    table = build_table(w, Fraction(2), 2, ctx)
    assert partition_function_tensor(w, Fraction(2), 2) == pytest.approx(
        float(partition_function(table, 2)), rel=1e-8)


def test_partition_function_tensor_dimension_limit():
    with pytest.raises(InvalidConfiguration):
        partition_function_tensor(Weight(), Fraction(2), 4)


def test_hankel_det_positive_for_quadrature_table(ctx):
    w = Weight(potential=Potential.quadratic(1.0, 0.0))
    table = build_table(w, Fraction(2), 3, ctx)
    assert hankel_det(table, 4) > 0


def test_hankel_det_flags_non_positive(table):
    broken = type(table)(theta=table.theta, weight=table.weight, ctx=table.ctx,
                         entries=tuple(tuple(-v for v in row) for row in table.entries))
    with pytest.raises(NonPositive):
        hankel_det(broken, 1)


def test_table_csv(table, tmp_path):
    path = tmp_path / "table.csv"
    count = write_table_csv(table, str(path), {"command": "polys"})
    lines = path.read_text().splitlines()
    assert count == 25
    assert lines[0].startswith("# config: ")
    assert lines[1] == "j,k,m_jk"
    assert len(lines) == 27
    assert next(table_rows(table))[:2] == (0, 0)


def test_table_csv_keeps_forty_digits(ctx, tmp_path):
    path = tmp_path / "table.csv"
    write_table_csv(build_table(Weight(), Fraction(3, 2), 2, ctx), str(path), {"command": "polys"})
    rows = [line.split(",") for line in path.read_text().splitlines()[2:]]
    entry = next(m for j, k, m in rows if (j, k) == ("1", "0"))
    digits = entry.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
    assert len(digits) == 40
    with mpmath.workdps(60):
        assert abs(mpmath.mpf(entry) - mpmath.gamma(mpmath.mpf(5) / 2)) < mpmath.mpf(10) ** -38
