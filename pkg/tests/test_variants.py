from types import SimpleNamespace

import numpy as np
import pytest
from scipy import stats

from vcselect.basis import basis_matrix
from vcselect.models import Dataset
from vcselect.rng import RngHandle
from vcselect.samplers import build_sampler, fit_posterior, run_bqrvc, run_bvc, run_bvcss
from vcselect.samplers.engine import log_slab_to_spike_ratio, spike_probability_from_posterior
from vcselect.samplers.variants import (
    BVCSampler,
    BVCSSSampler,
    gaussian_alpha_block_posterior,
    lambda_sq_conditional,
    sigma_sq_conditional,
    update_gaussian_alpha_block,
    update_gaussian_pi0,
    update_lambda_sq,
    update_sigma_sq,
    update_zeta_sq,
)
from vcselect.schemas import GaussianPriorConfig, McmcOptions, PriorConfig, RunConfig, SplineConfig

from conftest import within_se

LINEAR = SplineConfig(degree=1, interior_knots=0)
QUADRATIC = SplineConfig(degree=2, interior_knots=2)
SHORT = McmcOptions(iterations=40, burn_in=10, thin=1, seed=3)


def ten_predictor_dataset(n=20, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset.from_predictors(rng.standard_normal(n), rng.standard_normal((n, 10)), rng.uniform(size=n))


def gaussian_state(model, included=(), seed=0):
    rng = np.random.default_rng(seed)
    state = model.initial_state()
    for j in included:
        state.alpha[j] = rng.standard_normal(model.d)
        state.inclusion[j - 1] = True
    state.alpha[0] = rng.standard_normal(model.d)
    state.sigma_sq = 0.8
    state.zeta_sq = rng.uniform(0.5, 2.0, model.p)
    model.refresh_fit(state)
    return state


def test_bvcss_sigma_sq_shape_counts_included_blocks():
    model = BVCSSSampler(ten_predictor_dataset(), QUADRATIC, GaussianPriorConfig(s=1.0))
    state = gaussian_state(model, included=(2, 7))
    shape, scale = sigma_sq_conditional(state, model)
    assert shape == 16.0
    norms = np.sum(state.alpha[1:] ** 2, axis=1)
    expected = 0.5 * np.sum(model.residual() ** 2) + 0.5 * np.sum(norms / state.zeta_sq) + 1.0
    assert scale == pytest.approx(expected)


def test_bvc_sigma_sq_shape_counts_every_block():
    model = BVCSampler(ten_predictor_dataset(), QUADRATIC, GaussianPriorConfig(s=1.0))
    state = gaussian_state(model, included=range(1, 11))
    assert sigma_sq_conditional(state, model)[0] == 36.0


def test_lambda_sq_conditional():
    model = BVCSampler(ten_predictor_dataset(), QUADRATIC, GaussianPriorConfig(t=1.0, psi=2.0))
    state = gaussian_state(model)
    state.zeta_sq = np.full(10, 0.4)
    assert lambda_sq_conditional(state, model) == (31.0, pytest.approx(4.0))


def test_lambda_sq_draws_match_gamma_moments():
    model = BVCSampler(ten_predictor_dataset(), QUADRATIC, GaussianPriorConfig(t=1.0, psi=2.0))
    state = gaussian_state(model)
    state.zeta_sq = np.full(10, 0.4)
    rng = RngHandle(51)
    draws = np.array([update_lambda_sq(state, model, rng) for _ in range(100_000)])
    # Gamma(31, 4)
    assert within_se(draws, 31.0 / 4.0, variance=31.0 / 16.0)


def test_gaussian_pi0_uses_its_own_beta_prior():
    model = SimpleNamespace(priors=GaussianPriorConfig(a=1.0, b=1.0))
    state = SimpleNamespace(inclusion=np.arange(10) < 3, pi0=0.5)
    rng = RngHandle(50)
    draws = np.array([update_gaussian_pi0(state, model, rng) for _ in range(50_000)])
    # Beta(8, 4)
    assert within_se(draws, 8.0 / 12.0, variance=8.0 * 4.0 / (12.0 ** 2 * 13.0))


def test_gaussian_block_posterior_matches_dense_oracle(clinical_dataset):
    model = BVCSSSampler(clinical_dataset, LINEAR, GaussianPriorConfig())
    state = gaussian_state(model, included=(1, 3), seed=2)
    j = 3
    z = clinical_dataset.x[:, [j]] * basis_matrix(clinical_dataset.v, LINEAR)
    partial = clinical_dataset.y - model.fit + z @ state.alpha[j]
    precision = z.T @ z / state.sigma_sq + np.eye(model.d) / (state.sigma_sq * state.zeta_sq[j - 1])
    covariance = np.linalg.inv(precision)

    post = gaussian_alpha_block_posterior(state, model, j)
    np.testing.assert_allclose(post.covariance, covariance, rtol=1e-10)
    np.testing.assert_allclose(post.mean, covariance @ z.T @ partial / state.sigma_sq, rtol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_gaussian_spike_probability_matches_marginal_likelihoods(clinical_dataset, seed):
    model = BVCSSSampler(clinical_dataset, LINEAR, GaussianPriorConfig())
    state = gaussian_state(model, included=(1, 2, 3), seed=seed)
    state.pi0 = 0.3
    j = 2
    z = model.blocks[j]
    partial = model.partial_residual(state, j)
    slab_variance = state.sigma_sq * state.zeta_sq[j - 1]
    spike = stats.multivariate_normal.logpdf(partial, np.zeros(model.n), state.sigma_sq * np.eye(model.n))
    slab = stats.multivariate_normal.logpdf(
        partial, np.zeros(model.n), state.sigma_sq * np.eye(model.n) + slab_variance * z @ z.T
    )
    expected = 0.3 / (0.3 + 0.7 * np.exp(slab - spike))

    post = gaussian_alpha_block_posterior(state, model, j)
    assert log_slab_to_spike_ratio(post.mean, post.covariance, slab_variance) == pytest.approx(slab - spike,
                                                                                               rel=1e-8)
    assert spike_probability_from_posterior(post, slab_variance, 0.3) == pytest.approx(expected, rel=1e-8)


def test_bvc_matches_bvcss_at_zero_pi0(micro_dataset):
    spike = BVCSSSampler(micro_dataset, LINEAR, GaussianPriorConfig())
    slab = BVCSampler(micro_dataset, LINEAR, GaussianPriorConfig())
    a, b = spike.initial_state(), slab.initial_state()
    a.pi0 = 0.0
    spike.refresh_fit(a)
    slab.refresh_fit(b)
    rng_a, rng_b = RngHandle(9), RngHandle(9)
    for j in range(1, spike.p + 1):
        update_gaussian_alpha_block(a, spike, j, rng_a)
        update_gaussian_alpha_block(b, slab, j, rng_b)
    np.testing.assert_array_equal(a.alpha, b.alpha)
    assert a.inclusion.all()


def test_update_gaussian_alpha_block_validates_index(micro_dataset):
    model = BVCSSSampler(micro_dataset, LINEAR, GaussianPriorConfig())
    with pytest.raises(ValueError):
        update_gaussian_alpha_block(model.initial_state(), model, 3, RngHandle(0))


def test_sigma_sq_draws_match_inverse_gamma_moments():
    model = BVCSSSampler(ten_predictor_dataset(), QUADRATIC, GaussianPriorConfig())
    state = gaussian_state(model, included=(1,))
    shape, scale = sigma_sq_conditional(state, model)
    rng = RngHandle(51)
    draws = np.array([update_sigma_sq(state, model, rng) for _ in range(20_000)])
    variance = scale ** 2 / ((shape - 1) ** 2 * (shape - 2))
    assert within_se(draws, scale / (shape - 1), variance=variance)


def _zeta_state(alpha, sigma_sq, lambda_sq):
    return SimpleNamespace(alpha=alpha, inclusion=np.any(alpha[1:] != 0, axis=1), sigma_sq=sigma_sq,
                           lambda_sq=lambda_sq, zeta_sq=np.ones(alpha.shape[0] - 1))


def test_zeta_sq_for_zero_blocks_follows_its_prior():
    p, d = 20_000, 5
    state = _zeta_state(np.zeros((p + 1, d)), 1.0, 3.0)
    update_zeta_sq(state, SimpleNamespace(p=p, d=d), RngHandle(52))
    # Gamma(3, 1.5): mean 2, variance 4/3
    assert within_se(state.zeta_sq, 2.0, variance=4.0 / 3.0)


def test_zeta_sq_for_nonzero_blocks():
    p, d, sigma_sq, lambda_sq = 20_000, 2, 2.0, 2.0
    alpha = np.zeros((p + 1, d))
    alpha[1:, 1] = 2.0
    state = _zeta_state(alpha, sigma_sq, lambda_sq)
    update_zeta_sq(state, SimpleNamespace(p=p, d=d), RngHandle(53))
    # |alpha_j|^2 = sigma^2 lambda^2 so 1/zeta^2 ~ IG(1, lambda^2)
    assert within_se(1.0 / state.zeta_sq, 1.0, variance=1.0 / lambda_sq)


def test_gaussian_chains_are_deterministic(micro_dataset):
    first = run_bvcss(micro_dataset, LINEAR, GaussianPriorConfig(), SHORT, RngHandle(60))
    second = run_bvcss(micro_dataset, LINEAR, GaussianPriorConfig(), SHORT, RngHandle(60))
    assert first.tau is None
    for name in first.parameter_names:
        np.testing.assert_array_equal(first.pooled(name), second.pooled(name))
    inclusion = first.pooled('inclusion')
    np.testing.assert_array_equal(np.any(first.pooled('alpha')[:, 1:] != 0, axis=2), inclusion)
    assert np.all(first.pooled('sigma_sq') > 0)


@pytest.mark.parametrize("runner", ["bqrvc", "bvc"])
def test_slab_only_samplers_never_zero_a_block(micro_dataset, runner):
    if runner == "bqrvc":
        samples = run_bqrvc(micro_dataset, LINEAR, PriorConfig(), 0.5, SHORT, RngHandle(61))
    else:
        samples = run_bvc(micro_dataset, LINEAR, GaussianPriorConfig(), SHORT, RngHandle(61))
    assert 'pi0' not in samples.parameter_names
    assert samples.pooled('inclusion').all()
    assert np.all(np.any(samples.pooled('alpha')[:, 1:] != 0, axis=2))


@pytest.mark.parametrize("method", ["bqrvcss", "bqrvc", "bvcss", "bvc"])
def test_build_sampler_dispatches_on_method(micro_dataset, method):
    sampler = build_sampler(micro_dataset, RunConfig(method=method, spline=LINEAR))
    assert sampler.method == method
    assert sampler.spike == (method in ("bqrvcss", "bvcss"))


def test_fit_posterior_merges_chains_in_stream_order(micro_dataset):
    mcmc = McmcOptions(iterations=30, burn_in=10, thin=2, chains=2, seed=5)
    config = RunConfig(method='bqrvcss', spline=LINEAR, mcmc=mcmc, store_latents=False)
    samples = fit_posterior(micro_dataset, config, max_workers=1)
    assert [c.stream_id for c in samples.chains] == [0, 1]
    assert all(c.size == 10 for c in samples.chains)
    assert 'u_tilde' not in samples.parameter_names
    assert not np.array_equal(samples.chains[0].draws['alpha'], samples.chains[1].draws['alpha'])
    assert samples.pooled('alpha').shape[0] == 20


def test_parallel_chains_match_sequential_chains(micro_dataset):
    mcmc = McmcOptions(iterations=20, burn_in=5, chains=2, seed=6)
    config = RunConfig(method='bvcss', spline=LINEAR, mcmc=mcmc)
    sequential = fit_posterior(micro_dataset, config, max_workers=1)
    parallel = fit_posterior(micro_dataset, config, max_workers=2)
    for name in sequential.parameter_names:
        np.testing.assert_array_equal(sequential.pooled(name), parallel.pooled(name))
