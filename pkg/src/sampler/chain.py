"""Single-site random-walk Metropolis for the joint particle density

    prod_{i<j} (l_j - l_i)(l_j^theta - l_i^theta) prod_j w(l_j).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from src.core.errors import InvalidConfiguration
from src.equilibrium.measure import EquilibriumMeasure
from src.potentials.potential import Potential, Weight
from src.sampler.config import samplerDefaults

logger = logging.getLogger(__name__)

_DEFAULTS = samplerDefaults()


@dataclass(frozen=True)
class EnsembleConfig:
    n_particles: int
    theta: float
    weight: Weight
    proposal_scale: float = _DEFAULTS["proposal_scale"]
    seed: int = 0

    def __post_init__(self):
        if self.n_particles < 1:
            raise InvalidConfiguration(f"n_particles must be >= 1, got {self.n_particles}")
        if self.theta < 1:
            raise InvalidConfiguration(f"theta must be >= 1, got {self.theta}")
        if not self.proposal_scale > 0:
            raise InvalidConfiguration(f"proposal_scale must be positive, got {self.proposal_scale}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfiguration(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @classmethod
    def for_equilibrium(cls, n_particles: int, theta: float, potential: Potential,
                        alpha: float = 0.0, seed: int = 0, **kwargs) -> "EnsembleConfig":
        """Weight x^alpha e^{-n V(x)} with n tied to the particle count."""
        weight = Weight(alpha=alpha, n_scale=n_particles, potential=potential)
        return cls(n_particles=n_particles, theta=float(theta), weight=weight, seed=seed, **kwargs)


@dataclass
class ChainResult:
    samples: np.ndarray
    acceptance_rate: float
    sweeps_total: int
    burn_in: int
    thinning: int
    proposal_scale: float = field(default=0.0)

    @property
    def pooled(self) -> np.ndarray:
        return self.samples.ravel()


def log_density_unnormalized(cfg: EnsembleConfig, lambdas: Sequence[float]) -> float:
    lam = np.sort(np.asarray(lambdas, dtype=float))
    if lam.size != cfg.n_particles:
        raise InvalidConfiguration(f"expected {cfg.n_particles} coordinates, got {lam.size}")
    if lam[0] <= 0.0 or np.any(np.diff(lam) <= 0.0):
        raise InvalidConfiguration("coordinates must be positive and pairwise distinct")
    i, j = np.triu_indices(lam.size, k=1)
    powers = lam ** cfg.theta
    interaction = np.sum(np.log(lam[j] - lam[i])) + np.sum(np.log(powers[j] - powers[i]))
    return float(interaction + np.sum(cfg.weight.log_weight(lam)))


def metropolis_accept_probability(delta: float) -> float:
    """min(1, exp(delta)) for a change delta in log density."""
    if delta >= 0.0:
        return 1.0
    return math.exp(delta)


def _site_delta(cfg: EnsembleConfig, lam: np.ndarray, powers: np.ndarray, i: int,
                new: float, new_power: float) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(new - lam) / np.abs(lam[i] - lam)
        ratio_power = np.abs(new_power - powers) / np.abs(powers[i] - powers)
        ratio[i] = ratio_power[i] = 1.0
        interaction = np.sum(np.log(ratio)) + np.sum(np.log(ratio_power))
    return float(interaction + cfg.weight.log_weight(new) - cfg.weight.log_weight(lam[i]))


def _initial_configuration(n: int) -> np.ndarray:
    return _DEFAULTS["initial_spread"] * (np.arange(n) + 1.0) / n


def run_chain(cfg: EnsembleConfig, sweeps: int, burn_in: int, thinning: int = 1,
              tune: bool = True) -> ChainResult:
    """Sweeps of single-site updates with Gaussian steps reflected at 0.

    The proposal scale is tuned during burn-in toward the target acceptance
    rate; kept rows are sorted configurations.
    """
    if sweeps <= burn_in:
        raise InvalidConfiguration(f"sweeps ({sweeps}) must exceed burn_in ({burn_in})")
    if thinning < 1:
        raise InvalidConfiguration(f"thinning must be >= 1, got {thinning}")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n, theta = cfg.n_particles, cfg.theta
    lam = _initial_configuration(n)
    powers = lam ** theta
    scale = cfg.proposal_scale
    low, high = _DEFAULTS["scale_bounds"]
    target, interval = _DEFAULTS["target_acceptance"], _DEFAULTS["tune_interval"]

    kept = []
    window_accepted = accepted = proposed = 0
    for sweep in range(sweeps):
        steps = rng.normal(0.0, 1.0, n)
        uniforms = rng.uniform(0.0, 1.0, n)
        sweep_accepted = 0
        for i in range(n):
            new = abs(lam[i] + scale * steps[i])
            if new == 0.0:
                continue
            new_power = new ** theta
            delta = _site_delta(cfg, lam, powers, i, new, new_power)
            if uniforms[i] < metropolis_accept_probability(delta):
                lam[i], powers[i] = new, new_power
                sweep_accepted += 1

        if sweep < burn_in:
            window_accepted += sweep_accepted
            if tune and (sweep + 1) % interval == 0:
                rate = window_accepted / (interval * n)
                scale = min(high, max(low, scale * math.exp(rate - target)))
                window_accepted = 0
                logger.debug("sweep %d: window acceptance %.3f, proposal scale %.4g", sweep + 1, rate, scale)
            continue

        accepted += sweep_accepted
        proposed += n
        if (sweep - burn_in) % thinning == 0:
            kept.append(np.sort(lam))

    rate = accepted / proposed if proposed else 0.0
    logger.info("chain: %d kept sweeps, acceptance %.3f, proposal scale %.4g", len(kept), rate, scale)
    return ChainResult(samples=np.array(kept), acceptance_rate=rate, sweeps_total=sweeps,
                       burn_in=burn_in, thinning=thinning, proposal_scale=scale)


def ks_against_measure(result: ChainResult, measure: EquilibriumMeasure) -> float:
    """Kolmogorov-Smirnov distance between pooled particles and the equilibrium CDF."""
    return float(stats.kstest(result.pooled, measure.density.cdf_array).statistic)


def pooled_ks(results: Sequence[ChainResult], measure: EquilibriumMeasure) -> float:
    """KS distance over particles pooled from several independent chains."""
    pooled = np.concatenate([r.pooled for r in results])
    return float(stats.kstest(pooled, measure.density.cdf_array).statistic)
