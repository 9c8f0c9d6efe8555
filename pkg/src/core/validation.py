"""The `validate` suite: named checks over the identity and equilibrium layers."""

import json
import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.bimoments.moments import build_table, partition_function, partition_function_tensor
from src.biorthogonal.recurrence import recurrence_residuals, verify_cd
from src.biorthogonal.system import (
    BiorthogonalSystem,
    build_system,
    eval_poly,
    poly_via_determinant,
    poly_via_integral,
    verify_orthogonality,
)
from src.conformal.curve import trace_curve
from src.conformal.maps import ConformalMap, hard_edge_endpoint
from src.core.config import validationDefaults
from src.core.errors import BiorthoError, ConfigError, DegeneratePoint
from src.equilibrium.classify import classify_edge, locate_critical_rho, two_path_gap
from src.equilibrium.closed_form import laguerre_density_closed_form
from src.equilibrium.density import density_hard
from src.equilibrium.measure import (
    EquilibriumMeasure,
    Regime,
    euler_lagrange_grids,
    total_mass,
    verify_euler_lagrange,
)
from src.equilibrium.resolvent import ResolventData
from src.numerics.precision import PrecisionContext
from src.potentials.potential import Potential, Weight
from src.sampler.chain import EnsembleConfig, ks_against_measure, run_chain

logger = logging.getLogger(__name__)

MEASURE_CACHE_SIZE = 8

RECURRENCE_THETAS = (Fraction(2), Fraction(3, 2))
RECURRENCE_K_MAX = 6
CD_N_MAX = 8
EXPONENT_THETAS = (1.5, 2.0, 3.0)
DETERMINANT_POINTS = (0.3, 2.0, 7.5)
INTEGRAL_POINTS = (0.0, 1.7, 3.0)


def _log_slope(f: Callable[[float], float], xs) -> float:
    """Least-squares slope of log f against log x."""
    values = [f(float(x)) for x in xs]
    return float(np.polyfit(np.log(xs), np.log(values), 1)[0])


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass
class CheckResult:
    check_name: str
    passed: bool
    value: Any
    tolerance: Any


@dataclass
class CachedMeasure:
    measure: EquilibriumMeasure
    timestamp: float
    access_count: int = 0


class MeasureCache:
    """Equilibrium measures keyed by (potential, theta); several checks share one."""

    def __init__(self, size: int = MEASURE_CACHE_SIZE):
        self._size = size
        self._entries: Dict[str, CachedMeasure] = {}
        self._cache_hits = 0
        self._cache_misses = 0

    @staticmethod
    def _key(V: Potential, theta: float) -> str:
        description = V.describe()
        if description["kind"] == "custom":
            # callbacks have no text form; cached measures keep them alive, so their ids stay unique
            description = dict(description, callbacks=[id(f) for f in V.callbacks])
        return json.dumps([description, float(theta)], sort_keys=True)

    def get(self, V: Potential, theta: float) -> EquilibriumMeasure:
        key = self._key(V, theta)
        cached = self._entries.get(key)
        if cached:
            self._cache_hits += 1
            cached.access_count += 1
            cached.timestamp = time.time()
            return cached.measure
        self._cache_misses += 1
        measure = classify_edge(V, float(theta))
        if len(self._entries) >= self._size:
            oldest = min(self._entries, key=lambda k: self._entries[k].timestamp)
            del self._entries[oldest]
        self._entries[key] = CachedMeasure(measure=measure, timestamp=time.time())
        return measure

    def get_cache_stats(self) -> Dict[str, Any]:
        lookups = self._cache_hits + self._cache_misses
        return {
            "cache_hits": self._cache_hits,
            "cache_misses": self._cache_misses,
            "cache_size": len(self._entries),
            "hit_rate": self._cache_hits / lookups if lookups else 0,
        }


# ============================================================================
# SUITE
# ============================================================================

class ValidationSuite:

    def __init__(self, precision: int = 256, points: int = 100, seed: int = 7,
                 sweeps: int = 20000, burn_in: int = 4000, thinning: int = 10,
                 cache: Optional[MeasureCache] = None):
        self.ctx = PrecisionContext(mantissa_bits=precision)
        self.points = points
        self.seed = seed
        self.sweeps = sweeps
        self.burn_in = burn_in
        self.thinning = thinning
        self.cache = cache or MeasureCache()
        self._systems: Dict[Tuple[Fraction, int], BiorthogonalSystem] = {}
        self._checks: Dict[str, Callable[[], CheckResult]] = {
            "orthogonality": self.check_orthogonality,
            "recurrence": self.check_recurrence,
            "cd": self.check_cd,
            "unit_circle": self.check_unit_circle,
            "laguerre_c": self.check_laguerre_c,
            "laguerre_density": self.check_laguerre_density,
            "mass": self.check_mass,
            "transition": self.check_transition,
            "euler_lagrange": self.check_euler_lagrange,
            "monte_carlo": self.check_monte_carlo,
            "edge_exponents": self.check_edge_exponents,
            "critical_rho": self.check_critical_rho,
            "oracles": self.check_oracles,
            "partition_function": self.check_partition_function,
            "two_path_density": self.check_two_path_density,
            "resolvent": self.check_resolvent,
        }

    @property
    def available(self) -> List[str]:
        return list(self._checks)

    def resolve(self, names: Optional[Sequence[str]]) -> List[str]:
        if not names:
            return list(validationDefaults()["checks"])
        unknown = [n for n in names if n not in self._checks]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; known: {self.available}")
        return list(names)

    def run(self, names: Optional[Sequence[str]] = None) -> List[CheckResult]:
        results = []
        for name in self.resolve(names):
            start = time.time()
            try:
                result = self._checks[name]()
            except BiorthoError as exc:
                logger.error("check %s raised %s: %s", name, type(exc).__name__, exc)
                result = CheckResult(name, False, f"{type(exc).__name__}: {exc}", None)
            logger.info("check %s: %s (%.2fs)", name, "pass" if result.passed else "FAIL",
                        time.time() - start)
            results.append(result)
        logger.debug("measure cache: %s", self.cache.get_cache_stats())
        return results

    # ---- shared fixtures ----------------------------------------------------

    def _laguerre_system(self, theta: Fraction, jmax: int) -> BiorthogonalSystem:
        key = (theta, jmax)
        if key not in self._systems:
            self._systems[key] = build_system(Weight(), theta, jmax, self.ctx)
        return self._systems[key]

    def _laguerre_measure(self) -> EquilibriumMeasure:
        return self.cache.get(Potential.linear(1.0), 2.0)

    # ---- biorthogonal identities --------------------------------------------

    def check_orthogonality(self) -> CheckResult:
        residual = float(verify_orthogonality(self._laguerre_system(Fraction(2), 10)))
        return CheckResult("orthogonality", residual <= 1e-12, residual, 1e-12)

    def check_recurrence(self) -> CheckResult:
        worst = 0.0
        for theta in RECURRENCE_THETAS:
            a, b = theta.numerator, theta.denominator
            sys = self._laguerre_system(theta, RECURRENCE_K_MAX + max(a, b))
            for k in range(RECURRENCE_K_MAX + 1):
                worst = max(worst, *(float(r) for r in recurrence_residuals(sys, k)))
        return CheckResult("recurrence", worst <= 1e-15, worst, 1e-15)

    def check_cd(self) -> CheckResult:
        rng = np.random.Generator(np.random.PCG64(self.seed))
        worst = 0.0
        for theta in RECURRENCE_THETAS:
            sys = self._laguerre_system(theta, CD_N_MAX + theta.numerator)
            for i in range(self.points):
                x, y = rng.uniform(0.0, 5.0, 2)
                try:
                    residual = float(verify_cd(sys, 1 + i % CD_N_MAX, float(x), float(y)))
                except DegeneratePoint:
                    continue
                worst = max(worst, residual)
        return CheckResult("cd", worst <= 1e-12, worst, 1e-12)

    # ---- equilibrium --------------------------------------------------------

    def check_unit_circle(self) -> CheckResult:
        curve = trace_curve(ConformalMap.hard(1.0, 1.0))
        worst = float(np.max(np.abs(curve.radii - 1.0)))
        return CheckResult("unit_circle", worst <= 1e-10, worst, 1e-10)

    def check_laguerre_c(self) -> CheckResult:
        measure = self._laguerre_measure()
        c = measure.map.c
        gap = max(abs(c - 2.0), abs(measure.support[1] - 3.0 * math.sqrt(3.0)),
                  abs(hard_edge_endpoint(2.0, c) - measure.support[1]))
        return CheckResult("laguerre_c", gap <= 1e-8, gap, 1e-8)

    def check_laguerre_density(self) -> CheckResult:
        measure = self._laguerre_measure()
        V, b = measure.potential, measure.support[1]
        worst = 0.0
        for k in range(50):
            x = b * (k + 0.5) / 50
            quad = density_hard(V, 2.0, measure.map.c, measure.curve, x)
            worst = max(worst, abs(quad - laguerre_density_closed_form(1.0, x)))
        return CheckResult("laguerre_density", worst <= 1e-4, worst, 1e-4)

    def check_mass(self) -> CheckResult:
        gap = abs(total_mass(self._laguerre_measure()) - 1.0)
        return CheckResult("mass", gap <= 1e-6, gap, 1e-6)

    def check_transition(self) -> CheckResult:
        hard = self.cache.get(Potential.quadratic(1.0, 0.0), 2.0)
        soft = self.cache.get(Potential.quadratic(1.0, -3.0), 2.0)
        if hard.regime is not Regime.HARD_EDGE or soft.regime is not Regime.SOFT_EDGE:
            value = f"regimes {hard.regime.value}/{soft.regime.value}"
            return CheckResult("transition", False, value, 1e-6)
        gap = max(abs(soft.map.c0 - 1.5), abs(soft.map.c1 - 2.0 / 3.0))
        return CheckResult("transition", gap <= 1e-6, gap, 1e-6)

    def check_euler_lagrange(self) -> CheckResult:
        worst_dev, worst_slack = 0.0, math.inf
        for measure in (self._laguerre_measure(), self.cache.get(Potential.quadratic(1.0, -3.0), 2.0)):
            report = verify_euler_lagrange(measure, *euler_lagrange_grids(measure))
            worst_dev = max(worst_dev, report.max_dev_on_support)
            worst_slack = min(worst_slack, report.min_slack_off_support)
        passed = worst_dev <= 1e-3 and worst_slack > 0.0
        return CheckResult("euler_lagrange", passed,
                           {"max_deviation": worst_dev, "min_slack": worst_slack}, 1e-3)

    def check_monte_carlo(self) -> CheckResult:
        cfg = EnsembleConfig.for_equilibrium(50, 2.0, Potential.linear(1.0), seed=self.seed)
        result = run_chain(cfg, self.sweeps, self.burn_in, self.thinning)
        distance = ks_against_measure(result, self._laguerre_measure())
        return CheckResult("monte_carlo", distance <= 0.1, distance, 0.1)

    def check_edge_exponents(self) -> CheckResult:
        worst_hard = 0.0
        for theta in EXPONENT_THETAS:
            measure = self.cache.get(Potential.linear(1.0), theta)
            b = measure.support[1]
            xs = np.geomspace(1e-8 * b, 1e-5 * b, 6)
            slope = _log_slope(measure.density.psi_exact, xs)
            worst_hard = max(worst_hard, abs(slope + 1.0 / (theta + 1.0)))
        soft = self.cache.get(Potential.quadratic(1.0, -3.0), 2.0)
        a, b = soft.support
        gaps = np.geomspace(1e-7 * (b - a), 1e-5 * (b - a), 5)
        psi = soft.density.psi_exact
        worst_soft = max(abs(_log_slope(lambda g: psi(b - g), gaps) - 0.5),
                         abs(_log_slope(lambda g: psi(a + g), gaps) - 0.5))
        passed = worst_hard <= 0.02 and worst_soft <= 0.05
        return CheckResult("edge_exponents", passed, {"hard": worst_hard, "soft": worst_soft},
                           {"hard": 0.02, "soft": 0.05})

    def check_critical_rho(self) -> CheckResult:
        gap = abs(locate_critical_rho(2.0) + 2.0)
        return CheckResult("critical_rho", gap <= 0.05, gap, 0.05)

    def check_oracles(self) -> CheckResult:
        sys = self._laguerre_system(Fraction(2), 10)
        worst_det, worst_int = 0.0, 0.0
        for x in DETERMINANT_POINTS:
            for kind in ("p", "q"):
                for j in range(sys.jmax):
                    direct = eval_poly(sys, kind, j, x)
                    gap = abs(direct - poly_via_determinant(sys.table, kind, j, x))
                    worst_det = max(worst_det, float(gap / max(1, abs(direct))))
        for x in INTEGRAL_POINTS:
            for j in range(3):
                direct = float(eval_poly(sys, "p", j, x))
                gap = abs(direct - poly_via_integral(Weight(), Fraction(2), j, x))
                worst_int = max(worst_int, gap / max(1.0, abs(direct)))
        passed = worst_det <= 1e-15 and worst_int <= 1e-6
        return CheckResult("oracles", passed, {"determinant": worst_det, "integral": worst_int},
                           {"determinant": 1e-15, "integral": 1e-6})

    def check_partition_function(self) -> CheckResult:
        worst = 0.0
        for theta in RECURRENCE_THETAS:
            exact = float(partition_function(build_table(Weight(), theta, 2, self.ctx), 2))
            worst = max(worst, abs(partition_function_tensor(Weight(), theta, 2) / exact - 1.0))
        return CheckResult("partition_function", worst <= 1e-8, worst, 1e-8)

    def check_two_path_density(self) -> CheckResult:
        worst = max(two_path_gap(self.cache.get(V, 2.0))
                    for V in (Potential.quadratic(1.0, 0.0), Potential.quadratic(1.0, -3.0)))
        return CheckResult("two_path_density", worst <= 1e-6, worst, 1e-6)

    def check_resolvent(self) -> CheckResult:
        gaps = {}
        for label, V in (("hard", Potential.linear(1.0)), ("soft", Potential.quadratic(1.0, -3.0))):
            measure = self.cache.get(V, 2.0)
            checks = ResolventData(measure.map, measure.curve, V).conditions()
            gaps[label] = max(abs(checks["n_at_zero"] - 2.0), abs(checks["n_at_far"] - 1.0),
                              abs(checks.get("n_at_minus_one", 0.0)))
        worst = max(gaps.values())
        return CheckResult("resolvent", worst <= 1e-5, gaps, 1e-5)
