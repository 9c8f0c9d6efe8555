"""External fields V and weights w(x) = x^alpha e^{-n V(x)}."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from src.core.errors import ConfigError, InvalidConfiguration
from src.potentials.config import growthProbeDefaults, oneCutGridDefaults, weightAliases

logger = logging.getLogger(__name__)


class PotentialKind(str, Enum):
    POLYNOMIAL = "polynomial"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Potential:
    """V with its first two derivatives.

    Polynomial kinds keep ascending coefficients; custom kinds carry
    callbacks (V, V', V'').
    """
    kind: PotentialKind
    coeffs: Tuple[float, ...] = ()
    callbacks: Optional[Tuple[Callable, Callable, Callable]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind is PotentialKind.CUSTOM:
            if self.callbacks is None or len(self.callbacks) != 3:
                raise InvalidConfiguration("custom potential needs callbacks (V, V', V'')")
            return
        if not self.coeffs:
            raise InvalidConfiguration("polynomial coefficient list must be non-empty")
        if self.kind is PotentialKind.QUADRATIC and self.tau <= 0:
            raise InvalidConfiguration(f"quadratic potential needs tau > 0, got {self.tau}")

    # ---- constructors -------------------------------------------------------

    @classmethod
    def linear(cls, rho: float) -> "Potential":
        return cls(PotentialKind.LINEAR, (0.0, float(rho)))

    @classmethod
    def quadratic(cls, tau: float, rho: float) -> "Potential":
        return cls(PotentialKind.QUADRATIC, (0.0, float(rho), float(tau)))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "Potential":
        return cls(PotentialKind.POLYNOMIAL, tuple(float(c) for c in coeffs))

    @classmethod
    def custom(cls, v: Callable, dv: Callable, d2v: Callable) -> "Potential":
        return cls(PotentialKind.CUSTOM, (), (v, dv, d2v))

    # ---- accessors ----------------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        return self.kind is not PotentialKind.CUSTOM

    @property
    def rho(self) -> float:
        return self.coeffs[1] if len(self.coeffs) > 1 else 0.0

    @property
    def tau(self) -> float:
        return self.coeffs[2] if len(self.coeffs) > 2 else 0.0

    @property
    def is_linear(self) -> bool:
        return self.is_polynomial and all(c == 0.0 for c in self.coeffs[2:]) and self.rho != 0.0

    def derivative_coeffs(self, order: int) -> Tuple[float, ...]:
        coeffs = list(self.coeffs)
        for _ in range(order):
            coeffs = [k * c for k, c in enumerate(coeffs)][1:] or [0.0]
        return tuple(coeffs)

    def evaluate(self, x, order: int = 0):
        """V, V' or V'' at x (float, numpy array or mpmath number)."""
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0, 1 or 2, got {order}")
        if self.kind is PotentialKind.CUSTOM:
            return self.callbacks[order](x)
        result = 0.0
        for c in reversed(self.derivative_coeffs(order)):
            result = result * x + c
        return result

    def describe(self) -> Dict[str, Any]:
        if self.kind is PotentialKind.LINEAR:
            return {"kind": "linear", "rho": self.rho}
        if self.kind is PotentialKind.QUADRATIC:
            return {"kind": "quadratic", "tau": self.tau, "rho": self.rho}
        if self.kind is PotentialKind.POLYNOMIAL:
            return {"kind": "polynomial", "coeffs": list(self.coeffs)}
        return {"kind": "custom"}


def potential_eval(V: Potential, x, order: int = 0):
    return V.evaluate(x, order)


@dataclass(frozen=True)
class Weight:
    alpha: float = 0.0
    n_scale: int = 1
    potential: Potential = field(default_factory=lambda: Potential.linear(1.0))

    def __post_init__(self):
        if self.alpha <= -1:
            raise InvalidConfiguration(f"alpha must exceed -1, got {self.alpha}")
        if self.n_scale < 1:
            raise InvalidConfiguration(f"n_scale must be a positive integer, got {self.n_scale}")

    @property
    def is_laguerre_type(self) -> bool:
        return self.potential.is_linear and self.potential.rho > 0

    def log_weight(self, x):
        """alpha*log(x) - n*V(x); works on floats, numpy arrays and mpmath numbers."""
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            return self.alpha * mpmath.log(x) - self.n_scale * self.potential.evaluate(x)
        return self.alpha * np.log(x) - self.n_scale * self.potential.evaluate(x)

    def evaluate(self, x):
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            if self.alpha == 0:
                return mpmath.exp(-self.n_scale * self.potential.evaluate(x))
            return x ** self.alpha * mpmath.exp(-self.n_scale * self.potential.evaluate(x))
        return np.exp(self.log_weight(x))


# ============================================================================
# CHECKS
# ============================================================================

@dataclass
class GrowthReport:
    passed: bool
    ratios: Tuple[float, ...]
    note: str = "heuristic: V(x)/log x must increase along the probe grid"


@dataclass
class OneCutReport:
    cond_i: bool
    cond_ii: bool
    first_violation: Optional[float] = None


def default_probe_grid():
    d = growthProbeDefaults()
    return np.geomspace(d["probe_min"], d["probe_max"], d["probe_points"])


def default_one_cut_grid():
    d = oneCutGridDefaults()
    return np.geomspace(d["grid_min"], d["grid_max"], d["grid_points"])


def check_growth(V: Potential, probe_grid: Optional[Sequence[float]] = None) -> GrowthReport:
    """Heuristic check that V(x)/log x grows without bound.

    The ratio must increase strictly along the tail half of the grid.
    """
    grid = np.asarray(default_probe_grid() if probe_grid is None else probe_grid, dtype=float)
    grid = grid[grid > 1.0]
    ratios = np.array([V.evaluate(float(x)) / math.log(x) for x in grid])
    tail = ratios[len(ratios) // 2:]
    increments = np.diff(tail)
    passed = bool(len(tail) > 1 and np.all(increments > 1e-9 * np.maximum(1.0, np.abs(tail[:-1]))))
    return GrowthReport(passed=passed, ratios=tuple(float(r) for r in tail[-5:]))


def check_one_cut_hard_conditions(V: Potential, grid: Optional[Sequence[float]] = None) -> OneCutReport:
    """Check V''(x)x + V'(x) > 0 and V''(x) >= 0 on a grid in (0, inf)."""
    grid = np.asarray(default_one_cut_grid() if grid is None else grid, dtype=float)
    cond_i, cond_ii, first = True, True, None
    for x in grid:
        d1, d2 = V.evaluate(float(x), 1), V.evaluate(float(x), 2)
        bad_i, bad_ii = not (d2 * x + d1 > 0), d2 < 0
        if (bad_i or bad_ii) and first is None:
            first = float(x)
        cond_i &= not bad_i
        cond_ii &= not bad_ii
    return OneCutReport(cond_i=cond_i, cond_ii=cond_ii, first_violation=first)


# ============================================================================
# PARSING
# ============================================================================

def _floats(text: str):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse numbers from {text!r}") from exc


def parse_potential(spec: Union[str, Mapping[str, Any]]) -> Potential:
    """Build a Potential from `kind:args` text or a JSON-style mapping."""
    if isinstance(spec, Potential):
        return spec
    if isinstance(spec, str):
        kind, _, args = spec.partition(":")
        kind = kind.strip().lower()
        values = _floats(args)
        if kind == "linear" and len(values) == 1:
            return Potential.linear(values[0])
        if kind == "quadratic" and len(values) == 2:
            return Potential.quadratic(values[0], values[1])
        if kind == "polynomial" and values:
            return Potential.polynomial(values)
        if kind in weightAliases():
            return parse_potential(weightAliases()[kind][0])
        raise ConfigError(f"unrecognized potential {spec!r}")
    try:
        kind = str(spec["kind"]).lower()
        if kind == "linear":
            return Potential.linear(float(spec["rho"]))
        if kind == "quadratic":
            return Potential.quadratic(float(spec["tau"]), float(spec["rho"]))
        if kind == "polynomial":
            return Potential.polynomial(spec["coeffs"])
    except (KeyError, TypeError, ValueError, InvalidConfiguration) as exc:
        raise ConfigError(f"bad potential description {dict(spec)!r}: {exc}") from exc
    raise ConfigError(f"unrecognized potential kind {spec.get('kind')!r}")


def parse_weight(name: Optional[str], potential: Optional[Potential] = None,
                 alpha: Optional[float] = None, n_scale: int = 1) -> Weight:
    """Resolve a weight alias (e.g. `laguerre`) or wrap an explicit potential."""
    aliases = weightAliases()
    if name:
        if name not in aliases:
            raise ConfigError(f"unknown weight {name!r}; known: {sorted(aliases)}")
        spec, default_alpha = aliases[name]
        potential = parse_potential(spec)
        alpha = default_alpha if alpha is None else alpha
    if potential is None:
        raise ConfigError("a weight needs either --weight or --potential")
    try:
        return Weight(alpha=0.0 if alpha is None else float(alpha), n_scale=int(n_scale),
                      potential=potential)
    except InvalidConfiguration as exc:
        raise ConfigError(str(exc)) from exc
