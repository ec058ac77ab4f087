"""Enumeration oracle: closed-form agreement and Gibbs cross-validation."""

import numpy as np
import pytest

from epvkit import ConfigError
from epvkit.mixture.data import prepare_dataset
from epvkit.mixture.exact import ENUMERATION_BOUND, exact_posterior_mean
from epvkit.mixture.gibbs import SamplerConfig, gibbs_fit
from epvkit.mixture.priors import league_prior, predictive
from epvkit.pitch import field_centre_index, try_centre_index


def ds(xs, ys, outcomes):
    return prepare_dataset(
        np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), np.asarray(outcomes)
    )


def test_zero_observations_returns_prior_means():
    data = ds([], [], np.array([], dtype=int))
    np.testing.assert_allclose(
        exact_posterior_mean(data, league_prior()), predictive(league_prior()), atol=1e-15
    )


def test_single_node_observation_is_conjugate_update():
    alpha = league_prior()
    data = ds([50.0], [90.0], [4])
    k = field_centre_index(50.0, 90.0)
    mean = exact_posterior_mean(data, alpha)
    counts = np.array([0, 0, 0, 0, 1.0])
    np.testing.assert_allclose(
        mean[k], (alpha[k] + counts) / (alpha[k].sum() + 1.0), atol=1e-12
    )
    other = np.delete(np.arange(33), k)
    np.testing.assert_allclose(mean[other], predictive(alpha)[other], atol=1e-15)


def test_symmetric_supports_give_symmetric_means():
    # try-area midpoint weights two identical-prior centres equally
    data = ds([17.5], [105.0], [3])
    mean = exact_posterior_mean(data, league_prior())
    np.testing.assert_allclose(
        mean[try_centre_index(0.0)], mean[try_centre_index(35.0)], atol=1e-12
    )


def test_two_centre_observation_hand_computed():
    # one observation split between two centres with distinct priors:
    # the assignment posterior is w_k * alpha_ks / sum(alpha_k), and the
    # mean mixes the conjugate update with the untouched prior
    alpha = league_prior().copy()
    k100 = field_centre_index(0.0, 100.0)
    k90 = field_centre_index(0.0, 90.0)
    data = ds([0.0], [97.0], [4])  # cell y in [90, 100], weights 0.3 / 0.7
    w90, w100 = 0.3, 0.7
    s = 4
    lik90 = alpha[k90, s] / alpha[k90].sum()
    lik100 = alpha[k100, s] / alpha[k100].sum()
    q90 = w90 * lik90 / (w90 * lik90 + w100 * lik100)
    q100 = 1.0 - q90

    e = np.zeros(5)
    e[s] = 1.0
    conj90 = (alpha[k90] + e) / (alpha[k90].sum() + 1.0)
    conj100 = (alpha[k100] + e) / (alpha[k100].sum() + 1.0)
    prior90 = alpha[k90] / alpha[k90].sum()
    prior100 = alpha[k100] / alpha[k100].sum()

    mean = exact_posterior_mean(data, alpha)
    np.testing.assert_allclose(mean[k90], q90 * conj90 + q100 * prior90, atol=1e-12)
    np.testing.assert_allclose(mean[k100], q100 * conj100 + q90 * prior100, atol=1e-12)


def test_enumeration_bound_enforced():
    n = 11  # 4^11 > 10^6
    data = ds([5.0] * n, [0.0] * n, [0] * n)
    with pytest.raises(ConfigError, match="gibbs_fit"):
        exact_posterior_mean(data, league_prior())
    assert ENUMERATION_BOUND == 10**6


def test_gibbs_matches_enumeration_small_instance():
    # three observations sharing two field cells
    data = ds([10.0, 12.0, 30.0], [95.0, 96.0, 97.0], [4, 0, 2])
    alpha = league_prior()
    exact = exact_posterior_mean(data, alpha)
    post = gibbs_fit(
        data, alpha, SamplerConfig(seed=33, chains=4, iterations=3000, burn_in=500, thinning=1)
    )
    se = post.standard_error()
    diff = np.abs(post.mean - exact)
    within = diff <= 3.0 * se + 1e-9
    # 165 comparisons at a 3-sigma bound leave room for a stray outlier
    assert within.mean() >= 0.95
    assert np.all(diff <= 6.0 * se + 1e-9)
