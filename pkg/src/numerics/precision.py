"""Precision and quadrature settings shared by the numerical kernels."""

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Union

import mpmath

from src.core.errors import InvalidConfiguration
from src.numerics.config import (
    equilibriumQuadratureDefaults,
    precisionDefaults,
    quadratureDefaults,
)


class QuadratureScheme(str, Enum):
    GAUSS_LEGENDRE_PANELS = "gauss_legendre_panels"
    TANH_SINH = "tanh_sinh"
    GAUSS_LAGUERRE = "gauss_laguerre"


@dataclass(frozen=True)
class PrecisionContext:
    mantissa_bits: int = precisionDefaults()["mantissa_bits"]
    target_tol: float = precisionDefaults()["target_tol"]

    def __post_init__(self):
        if self.mantissa_bits < 64:
            raise InvalidConfiguration(f"mantissa_bits must be >= 64, got {self.mantissa_bits}")
        if self.target_tol <= 0:
            raise InvalidConfiguration("target_tol must be positive")

    def workprec(self):
        """Context manager that sets mpmath's working precision."""
        return mpmath.workprec(self.mantissa_bits)

    @property
    def eps(self):
        return mpmath.mpf(2) ** (-self.mantissa_bits)


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: QuadratureScheme = QuadratureScheme(quadratureDefaults()["scheme"])
    panel_count: int = quadratureDefaults()["panel_count"]
    points_per_panel: int = quadratureDefaults()["points_per_panel"]
    abs_tol: float = quadratureDefaults()["abs_tol"]
    rel_tol: float = quadratureDefaults()["rel_tol"]
    # Gauss-Laguerre path only: weight x^alpha e^{-rate x}
    alpha: float = 0.0
    rate: float = 1.0
    # Gauss-Legendre panels on the half-line are laid on [0, cutoff]
    cutoff: float = 1000.0
    # scipy.integrate.quad subinterval limit for the double-precision paths
    limit: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvalidConfiguration("quadrature tolerances must be positive")
        if self.panel_count < 1 or self.points_per_panel < 1:
            raise InvalidConfiguration("panel_count and points_per_panel must be >= 1")
        object.__setattr__(self, "scheme", QuadratureScheme(self.scheme))

    def tolerance_for(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def refined(self) -> "QuadratureSpec":
        return replace(self, panel_count=2 * self.panel_count)


def equilibrium_quadrature() -> QuadratureSpec:
    return QuadratureSpec(**equilibriumQuadratureDefaults())


def to_mpf(value: Union[int, float, Fraction, str]):
    """Convert a real (exact fractions included) to an mpf at the current precision."""
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)
