"""Gibbs sampler for the Bayesian regularized quantile varying-coefficient model
with multivariate spike-and-slab priors (BQRVCSS).

The asymmetric Laplace likelihood is written as a normal mixture: given the
exponential latents u_tilde, Y_i is Gaussian with mean
E_i'beta + sum_j alpha_j'Z_ij + kappa1 u_i and variance kappa2^2 u_i / theta.
The standard-normal latents of that representation are integrated out.
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from vcselect.ald import ald_constants
from vcselect.errors import SamplerStateError
from vcselect.models import Dataset, PosteriorSamples, SamplerState
from vcselect.rng import (
    RngHandle,
    cholesky_lower,
    draw_from_precision_factor,
    sample_beta,
    sample_gamma,
    sample_inverse_gaussian,
)
from vcselect.samplers.engine import BlockPosterior, GibbsSampler, block_posterior, draw_block
from vcselect.schemas import PriorConfig, SplineConfig

logger = logging.getLogger(__name__)

RESIDUAL_FLOOR = 1e-10


def _inverse(matrix: np.ndarray, name: str) -> np.ndarray:
    chol = cholesky_lower(matrix, name)
    return linalg.cho_solve((chol, True), np.eye(matrix.shape[0]))


class BQRVCSSSampler(GibbsSampler):
    method = 'bqrvcss'
    spike = True

    def __init__(self, dataset: Dataset, spline: SplineConfig, priors: PriorConfig, tau: float,
                 store_latents: bool = True):
        super().__init__(dataset, spline, store_latents)
        self.priors = priors
        self.tau = tau
        self.constants = ald_constants(tau)
        self.alpha0_prior_precision = _inverse(priors.sigma_alpha0_matrix(self.d), 'sigma_alpha0')
        self.beta_prior_precision = _inverse(priors.sigma_beta_matrix(self.q), 'sigma_beta') if self.q else None

    def initial_state(self) -> SamplerState:
        return SamplerState(
            alpha=np.zeros((self.p + 1, self.d)),
            beta=np.zeros(self.q),
            u_tilde=np.ones(self.n),
            g=np.ones(self.p),
            theta=1.0,
            eta_sq=1.0,
            pi0=0.5 if self.spike else 0.0,
            inclusion=np.zeros(self.p, dtype=bool),
        )

    def weights(self, state: SamplerState) -> np.ndarray:
        return state.theta / (self.constants.kappa2_sq * state.u_tilde)

    def offset(self, state: SamplerState) -> np.ndarray:
        return self.constants.kappa1 * state.u_tilde

    def sweep(self, state: SamplerState, rng: RngHandle):
        self.refresh_fit(state)
        update_latent_u(state, self, rng)
        for j in range(1, self.p + 1):
            update_alpha_block(state, self, j, rng)
        update_alpha0(state, self, rng)
        update_beta(state, self, rng)
        update_theta(state, self, rng)
        update_eta_sq(state, self, rng)
        update_g(state, self, rng)
        if self.spike:
            update_pi0(state, self, rng)
        return state


def residual_without_block(state: SamplerState, model: GibbsSampler, i: int,
                           j: Optional[Union[int, str]] = None, subtract_offset: bool = False) -> float:
    """Y_i - E_i'beta - sum_{k != j} alpha_k'Z_ik, optionally minus kappa1 u_i.

    j is a block index, 'beta' to leave out the clinical block, or None.
    """
    value = model.y[i]
    if j != 'beta' and model.q:
        value -= model.e[i] @ state.beta
    for k in range(model.p + 1):
        if k != j:
            value -= model.blocks[k, i] @ state.alpha[k]
    if subtract_offset:
        value -= model.constants.kappa1 * state.u_tilde[i]
    return float(value)


# Latent u_tilde
def latent_u_conditional(state: SamplerState, model: BQRVCSSSampler) -> Tuple[np.ndarray, float]:
    """Inverse-Gaussian (mean, shape) of 1/u_tilde_i given the full residual."""
    c = model.constants
    residual = np.maximum(np.abs(model.residual()), RESIDUAL_FLOOR)
    mean = np.sqrt(c.u_mean_numerator) / residual
    shape = state.theta * c.u_shape_factor
    return mean, shape


def update_latent_u(state: SamplerState, model: BQRVCSSSampler, rng: RngHandle) -> np.ndarray:
    mean, shape = latent_u_conditional(state, model)
    state.u_tilde = 1.0 / sample_inverse_gaussian(rng, mean, shape, size=mean.shape)
    return state.u_tilde


# Spline blocks
def alpha_block_posterior(state: SamplerState, model: BQRVCSSSampler, j: int) -> BlockPosterior:
    target = model.partial_residual(state, j) - model.offset(state)
    prior_precision = np.eye(model.d) / state.g[j - 1]
    return block_posterior(model.blocks[j], target, model.weights(state), prior_precision)


def update_alpha_block(state: SamplerState, model: BQRVCSSSampler, j: int, rng: RngHandle):
    if not 1 <= j <= model.p:
        raise ValueError(f'block index must lie in 1..{model.p}, got {j}')
    post = alpha_block_posterior(state, model, j)
    slab_variance = state.g[j - 1]
    draw, included = draw_block(rng, post, slab_variance, state.pi0 if model.spike else None)
    model.set_block(state, j, draw)
    state.inclusion[j - 1] = included
    return draw, included


def alpha0_posterior(state: SamplerState, model: BQRVCSSSampler) -> BlockPosterior:
    target = model.partial_residual(state, 0) - model.offset(state)
    return block_posterior(model.blocks[0], target, model.weights(state), model.alpha0_prior_precision)


def update_alpha0(state: SamplerState, model: BQRVCSSSampler, rng: RngHandle) -> np.ndarray:
    post = alpha0_posterior(state, model)
    model.set_block(state, 0, draw_from_precision_factor(rng, post.mean, post.chol))
    return state.alpha[0]


def beta_posterior(state: SamplerState, model: BQRVCSSSampler) -> BlockPosterior:
    target = model.residual() + model.e @ state.beta - model.offset(state)
    return block_posterior(model.e, target, model.weights(state), model.beta_prior_precision)


def update_beta(state: SamplerState, model: BQRVCSSSampler, rng: RngHandle) -> np.ndarray:
    if not model.q:
        return state.beta
    post = beta_posterior(state, model)
    model.set_beta(state, draw_from_precision_factor(rng, post.mean, post.chol))
    return state.beta


# Scalars
def theta_conditional(state: SamplerState, model: BQRVCSSSampler) -> Tuple[float, float]:
    c = model.constants
    scaled = model.residual() - model.offset(state)
    shape = 1.5 * model.n + model.priors.a
    rate = 0.5 * np.sum(scaled ** 2 / (c.kappa2_sq * state.u_tilde)) + np.sum(state.u_tilde) + model.priors.b
    return shape, float(rate)


def update_theta(state: SamplerState, model: BQRVCSSSampler, rng: RngHandle) -> float:
    shape, rate = theta_conditional(state, model)
    state.theta = float(sample_gamma(rng, shape, rate))
    return state.theta


def eta_sq_conditional(state: SamplerState, model: GibbsSampler) -> Tuple[float, float]:
    shape = 0.5 * (model.d + 1) * model.p + model.priors.c
    rate = 0.5 * float(np.sum(state.g)) + model.priors.m
    return shape, rate


def update_eta_sq(state: SamplerState, model: GibbsSampler, rng: RngHandle) -> float:
    shape, rate = eta_sq_conditional(state, model)
    state.eta_sq = float(sample_gamma(rng, shape, rate))
    return state.eta_sq


def block_norms(state, model: GibbsSampler) -> np.ndarray:
    norms = np.sum(state.alpha[1:] ** 2, axis=1)
    if np.any(state.inclusion & (norms == 0.0)):
        raise SamplerStateError('inclusion flag set on an all-zero block')
    return norms


def update_g(state: SamplerState, model: GibbsSampler, rng: RngHandle) -> np.ndarray:
    """Slab scales: prior Gamma((d+1)/2, eta^2/2) for zero blocks, 1/g ~ IG(sqrt(eta^2/|alpha|^2), eta^2) otherwise."""
    norms = block_norms(state, model)
    nonzero = norms > 0.0
    g = np.empty(model.p)
    if np.any(nonzero):
        g[nonzero] = 1.0 / sample_inverse_gaussian(
            rng, np.sqrt(state.eta_sq / norms[nonzero]), state.eta_sq, size=int(np.sum(nonzero))
        )
    if np.any(~nonzero):
        g[~nonzero] = sample_gamma(rng, 0.5 * (model.d + 1), 0.5 * state.eta_sq, size=int(np.sum(~nonzero)))
    state.g = g
    return state.g


def pi0_conditional(state, e: float, f: float) -> Tuple[float, float]:
    """Beta(e + #zero blocks, f + #nonzero blocks); pi0 is the spike weight."""
    included = int(np.sum(state.inclusion))
    return e + state.inclusion.shape[0] - included, f + included


def update_pi0(state: SamplerState, model: BQRVCSSSampler, rng: RngHandle) -> float:
    a, b = pi0_conditional(state, model.priors.e, model.priors.f)
    state.pi0 = float(sample_beta(rng, a, b))
    return state.pi0


def run_chain(dataset: Dataset, spline_config: SplineConfig, prior_config: PriorConfig, tau: float,
              iterations: int, burn_in: int, thin: int, rng: RngHandle,
              store_latents: bool = True, log_every: int = 1000) -> PosteriorSamples:
    sampler = BQRVCSSSampler(dataset, spline_config, prior_config, tau, store_latents)
    chain = sampler.run(iterations, burn_in, thin, rng, log_every)
    return PosteriorSamples(
        method=sampler.method, tau=tau, iterations=iterations, burn_in=burn_in, thin=thin,
        seed=rng.seed, degree=spline_config.degree, interior_knots=spline_config.interior_knots,
        chains=[chain],
    )
