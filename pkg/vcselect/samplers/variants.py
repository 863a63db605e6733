"""Comparator samplers: BQRVC (quantile, no spike), BVCSS and BVC (Gaussian likelihood)."""
import logging
from typing import Dict, Tuple

import numpy as np

from vcselect.models import Dataset, GaussianSamplerState, PosteriorSamples, SamplerState
from vcselect.rng import RngHandle, draw_from_precision_factor, sample_beta, sample_gamma, sample_inverse_gamma, \
    sample_inverse_gaussian
from vcselect.samplers.bqrvcss import BQRVCSSSampler, _inverse, block_norms, pi0_conditional
from vcselect.samplers.engine import BlockPosterior, GibbsSampler, block_posterior, draw_block
from vcselect.schemas import GaussianPriorConfig, McmcOptions, PriorConfig, SplineConfig

logger = logging.getLogger(__name__)


class BQRVCSampler(BQRVCSSSampler):
    """BQRVCSS without the point mass: every alpha_j is drawn from its Gaussian conditional."""
    method = 'bqrvc'
    spike = False

    def snapshot(self, state: SamplerState) -> Dict[str, np.ndarray]:
        draw = state.snapshot(self.store_latents)
        draw.pop('pi0')
        return draw


class BVCSSSampler(GibbsSampler):
    """Gaussian-likelihood varying coefficients with spike-and-slab group priors.

    The slab of block j is N(0, sigma^2 zeta_j^2 I), so every observation carries weight 1/sigma^2.
    """
    method = 'bvcss'
    spike = True

    def __init__(self, dataset: Dataset, spline: SplineConfig, priors: GaussianPriorConfig,
                 store_latents: bool = True):
        super().__init__(dataset, spline, store_latents)
        self.priors = priors
        self.alpha0_prior_precision = _inverse(priors.sigma_alpha0_matrix(self.d), 'sigma_alpha0')
        self.beta_prior_precision = _inverse(priors.sigma_beta_matrix(self.q), 'sigma_beta') if self.q else None

    def initial_state(self) -> GaussianSamplerState:
        return GaussianSamplerState(
            alpha=np.zeros((self.p + 1, self.d)),
            beta=np.zeros(self.q),
            sigma_sq=1.0,
            zeta_sq=np.ones(self.p),
            lambda_sq=1.0,
            pi0=0.5 if self.spike else 0.0,
            inclusion=np.zeros(self.p, dtype=bool),
        )

    def snapshot(self, state: GaussianSamplerState) -> Dict[str, np.ndarray]:
        draw = state.snapshot(self.store_latents)
        if not self.spike:
            draw.pop('pi0')
        return draw

    def sweep(self, state: GaussianSamplerState, rng: RngHandle):
        self.refresh_fit(state)
        for j in range(1, self.p + 1):
            update_gaussian_alpha_block(state, self, j, rng)
        update_gaussian_alpha0(state, self, rng)
        update_gaussian_beta(state, self, rng)
        update_sigma_sq(state, self, rng)
        update_zeta_sq(state, self, rng)
        update_lambda_sq(state, self, rng)
        if self.spike:
            update_gaussian_pi0(state, self, rng)
        return state


class BVCSampler(BVCSSSampler):
    """Bayesian group-lasso analogue: BVCSS without the point mass."""
    method = 'bvc'
    spike = False


def gaussian_alpha_block_posterior(state: GaussianSamplerState, model: BVCSSSampler, j: int) -> BlockPosterior:
    """Conditional of alpha_j: mean (Z_j'Z_j + zeta^-2 I)^-1 Z_j'r, covariance sigma^2 (Z_j'Z_j + zeta^-2 I)^-1."""
    weight = 1.0 / state.sigma_sq
    prior_precision = np.eye(model.d) * weight / state.zeta_sq[j - 1]
    return block_posterior(model.blocks[j], model.partial_residual(state, j), weight, prior_precision)


def update_gaussian_alpha_block(state: GaussianSamplerState, model: BVCSSSampler, j: int, rng: RngHandle):
    if not 1 <= j <= model.p:
        raise ValueError(f'block index must lie in 1..{model.p}, got {j}')
    post = gaussian_alpha_block_posterior(state, model, j)
    slab_variance = state.sigma_sq * state.zeta_sq[j - 1]
    draw, included = draw_block(rng, post, slab_variance, state.pi0 if model.spike else None)
    model.set_block(state, j, draw)
    state.inclusion[j - 1] = included
    return draw, included


def update_gaussian_alpha0(state: GaussianSamplerState, model: BVCSSSampler, rng: RngHandle) -> np.ndarray:
    post = block_posterior(model.blocks[0], model.partial_residual(state, 0), 1.0 / state.sigma_sq,
                           model.alpha0_prior_precision)
    model.set_block(state, 0, draw_from_precision_factor(rng, post.mean, post.chol))
    return state.alpha[0]


def update_gaussian_beta(state: GaussianSamplerState, model: BVCSSSampler, rng: RngHandle) -> np.ndarray:
    if not model.q:
        return state.beta
    target = model.residual() + model.e @ state.beta
    post = block_posterior(model.e, target, 1.0 / state.sigma_sq, model.beta_prior_precision)
    model.set_beta(state, draw_from_precision_factor(rng, post.mean, post.chol))
    return state.beta


def sigma_sq_conditional(state: GaussianSamplerState, model: BVCSSSampler) -> Tuple[float, float]:
    """Inverse-Gamma (shape, scale) of sigma^2."""
    norms = block_norms(state, model)
    if model.spike:
        shape = 0.5 * model.n + 0.5 * model.d * int(np.sum(state.inclusion)) + model.priors.s
    else:
        shape = 0.5 * (model.n + model.d * model.p) + model.priors.s
    scale = 0.5 * float(np.sum(model.residual() ** 2)) + 0.5 * float(np.sum(norms / state.zeta_sq)) + model.priors.h
    return shape, scale


def update_sigma_sq(state: GaussianSamplerState, model: BVCSSSampler, rng: RngHandle) -> float:
    shape, scale = sigma_sq_conditional(state, model)
    state.sigma_sq = float(sample_inverse_gamma(rng, shape, scale))
    return state.sigma_sq


def update_zeta_sq(state: GaussianSamplerState, model: BVCSSSampler, rng: RngHandle) -> np.ndarray:
    """Prior Gamma((d+1)/2, lambda^2/2) for zero blocks, 1/zeta^2 ~ IG(sqrt(sigma^2 lambda^2/|alpha|^2), lambda^2) otherwise."""
    norms = block_norms(state, model)
    nonzero = norms > 0.0
    zeta_sq = np.empty(model.p)
    if np.any(nonzero):
        mean = np.sqrt(state.sigma_sq * state.lambda_sq / norms[nonzero])
        zeta_sq[nonzero] = 1.0 / sample_inverse_gaussian(rng, mean, state.lambda_sq, size=int(np.sum(nonzero)))
    if np.any(~nonzero):
        zeta_sq[~nonzero] = sample_gamma(rng, 0.5 * (model.d + 1), 0.5 * state.lambda_sq,
                                         size=int(np.sum(~nonzero)))
    state.zeta_sq = zeta_sq
    return state.zeta_sq


def lambda_sq_conditional(state: GaussianSamplerState, model: BVCSSSampler) -> Tuple[float, float]:
    shape = 0.5 * (model.d + 1) * model.p + model.priors.t
    rate = 0.5 * float(np.sum(state.zeta_sq)) + model.priors.psi
    return shape, rate


def update_lambda_sq(state: GaussianSamplerState, model: BVCSSSampler, rng: RngHandle) -> float:
    shape, rate = lambda_sq_conditional(state, model)
    state.lambda_sq = float(sample_gamma(rng, shape, rate))
    return state.lambda_sq


def update_gaussian_pi0(state: GaussianSamplerState, model: BVCSSSampler, rng: RngHandle) -> float:
    a, b = pi0_conditional(state, model.priors.a, model.priors.b)
    state.pi0 = float(sample_beta(rng, a, b))
    return state.pi0


def _posterior(sampler: GibbsSampler, tau, mcmc: McmcOptions, rng: RngHandle) -> PosteriorSamples:
    chain = sampler.run(mcmc.iterations, mcmc.burn_in, mcmc.thin, rng, mcmc.log_every)
    return PosteriorSamples(
        method=sampler.method, tau=tau, iterations=mcmc.iterations, burn_in=mcmc.burn_in, thin=mcmc.thin,
        seed=rng.seed, degree=sampler.spline.degree, interior_knots=sampler.spline.interior_knots,
        chains=[chain],
    )


def run_bqrvc(dataset: Dataset, spline: SplineConfig, priors: PriorConfig, tau: float,
              mcmc: McmcOptions, rng: RngHandle, store_latents: bool = True) -> PosteriorSamples:
    return _posterior(BQRVCSampler(dataset, spline, priors, tau, store_latents), tau, mcmc, rng)


def run_bvcss(dataset: Dataset, spline: SplineConfig, priors: GaussianPriorConfig,
              mcmc: McmcOptions, rng: RngHandle) -> PosteriorSamples:
    return _posterior(BVCSSSampler(dataset, spline, priors), None, mcmc, rng)


def run_bvc(dataset: Dataset, spline: SplineConfig, priors: GaussianPriorConfig,
            mcmc: McmcOptions, rng: RngHandle) -> PosteriorSamples:
    return _posterior(BVCSampler(dataset, spline, priors), None, mcmc, rng)
