import math

import numpy as np
import pytest
from scipy import stats

from src.core.errors import InvalidConfiguration
from src.potentials.potential import Potential, Weight
from src.sampler.chain import (
    EnsembleConfig,
    log_density_unnormalized,
    ks_against_measure,
    metropolis_accept_probability,
    pooled_ks,
    run_chain,
)


@pytest.fixture
def pair():
    return EnsembleConfig(n_particles=2, theta=2.0, weight=Weight())


@pytest.fixture(scope="module")
def single_chain():
    cfg = EnsembleConfig(n_particles=1, theta=2.0, weight=Weight(), seed=3)
    return run_chain(cfg, sweeps=60000, burn_in=2000, thinning=10)


# ---- density ----------------------------------------------------------------

def test_log_density_pair(pair):
    assert log_density_unnormalized(pair, [1.0, 2.0]) == pytest.approx(math.log(3.0) - 3.0)


def test_log_density_is_symmetric(pair):
    assert log_density_unnormalized(pair, [2.0, 1.0]) == log_density_unnormalized(pair, [1.0, 2.0])


def test_log_density_single_particle_is_log_weight():
    cfg = EnsembleConfig(n_particles=1, theta=3.0, weight=Weight(alpha=0.5))
    assert log_density_unnormalized(cfg, [1.7]) == pytest.approx(0.5 * math.log(1.7) - 1.7)


@pytest.mark.parametrize("lambdas", [[1.0, 1.0], [0.0, 1.0], [-1.0, 2.0], [1.0]])
def test_log_density_rejects_bad_configurations(pair, lambdas):
    with pytest.raises(InvalidConfiguration):
        log_density_unnormalized(pair, lambdas)


@pytest.mark.parametrize("delta, expected", [(0.5, 1.0), (0.0, 1.0), (-1.0, math.exp(-1.0))])
def test_accept_probability(delta, expected):
    assert metropolis_accept_probability(delta) == pytest.approx(expected)


@pytest.mark.parametrize("kwargs", [
    {"n_particles": 0, "theta": 2.0},
    {"n_particles": 3, "theta": 0.5},
    {"n_particles": 3, "theta": 2.0, "proposal_scale": 0.0},
    {"n_particles": 3, "theta": 2.0, "seed": -1},
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidConfiguration):
        EnsembleConfig(weight=Weight(), **kwargs)


def test_for_equilibrium_ties_weight_to_particle_count():
    cfg = EnsembleConfig.for_equilibrium(8, 2, Potential.linear(1.0), seed=4)
    assert cfg.weight.n_scale == 8
    assert cfg.theta == 2.0


# ---- chains -----------------------------------------------------------------

def test_chain_rejects_short_run(pair):
    with pytest.raises(InvalidConfiguration):
        run_chain(pair, sweeps=100, burn_in=100)


def test_chain_rejects_bad_thinning(pair):
    with pytest.raises(InvalidConfiguration):
        run_chain(pair, sweeps=100, burn_in=10, thinning=0)


def test_chain_is_reproducible():
    cfg = EnsembleConfig.for_equilibrium(5, 2.0, Potential.linear(1.0), seed=11)
    first = run_chain(cfg, sweeps=600, burn_in=100, thinning=5)
    second = run_chain(cfg, sweeps=600, burn_in=100, thinning=5)
    assert np.array_equal(first.samples, second.samples)
    assert first.acceptance_rate == second.acceptance_rate


def test_chain_rows_are_sorted_and_positive():
    cfg = EnsembleConfig.for_equilibrium(6, 1.5, Potential.linear(1.0), seed=2)
    result = run_chain(cfg, sweeps=500, burn_in=100, thinning=4)
    assert result.samples.shape == (100, 6)
    assert np.all(result.samples > 0.0)
    assert np.all(np.diff(result.samples, axis=1) > 0.0)


def test_single_particle_is_exponential(single_chain):
    assert stats.kstest(single_chain.pooled, "expon").statistic <= 0.05


def test_acceptance_rate_after_tuning(single_chain):
    assert 0.1 <= single_chain.acceptance_rate <= 0.7


# ---- comparison with the equilibrium measure ---------------------------------

@pytest.mark.slow
def test_laguerre_particles_follow_equilibrium(laguerre_measure):
    cfg = EnsembleConfig.for_equilibrium(50, 2.0, Potential.linear(1.0), seed=7)
    result = run_chain(cfg, sweeps=20000, burn_in=4000, thinning=10)
    assert 0.1 <= result.acceptance_rate <= 0.7
    assert ks_against_measure(result, laguerre_measure) <= 0.1


@pytest.mark.slow
def test_pooled_chains_follow_equilibrium(soft_measure):
    results = [
        run_chain(EnsembleConfig.for_equilibrium(30, 2.0, Potential.quadratic(1.0, -3.0), seed=seed),
                  sweeps=6000, burn_in=2000, thinning=10)
        for seed in (1, 2, 3)
    ]
    assert pooled_ks(results, soft_measure) <= 0.1
