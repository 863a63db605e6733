"""Sweep machinery shared by the four samplers.

All four samplers update a spline block from the same weighted normal equations;
they differ in the per-observation weights, the working response, the slab
variance and whether a point mass at zero competes with the slab.
"""
import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy import linalg
from scipy.special import expit

from vcselect.basis import expand_design
from vcselect.errors import SamplerStateError
from vcselect.models import ChainDraws, Dataset
from vcselect.rng import RngHandle, cholesky_lower, draw_from_precision_factor
from vcselect.schemas import SplineConfig

logger = logging.getLogger(__name__)


@dataclass
class BlockPosterior:
    mean: np.ndarray
    chol: np.ndarray
    linear: np.ndarray

    @property
    def covariance(self) -> np.ndarray:
        return linalg.cho_solve((self.chol, True), np.eye(self.mean.shape[0]))

    @property
    def log_det_covariance(self) -> float:
        return -2.0 * float(np.sum(np.log(np.diag(self.chol))))

    @property
    def quadratic(self) -> float:
        # mu' Sigma^-1 mu, with Sigma^-1 mu equal to the linear term
        return float(self.linear @ self.mean)


def block_posterior(block: np.ndarray, target: np.ndarray, weights, prior_precision: np.ndarray) -> BlockPosterior:
    """Gaussian conditional of one coefficient block.

    precision = sum_i w_i z_i z_i' + prior_precision, linear = sum_i w_i z_i target_i.
    """
    weighted = block * np.broadcast_to(weights, target.shape)[:, None]
    precision = weighted.T @ block + prior_precision
    linear = weighted.T @ target
    chol = cholesky_lower(precision, 'block posterior precision')
    mean = linalg.cho_solve((chol, True), linear)
    return BlockPosterior(mean=mean, chol=chol, linear=linear)


def log_slab_to_spike_ratio(mean: np.ndarray, covariance: np.ndarray, slab_variance: float) -> float:
    """log of (slab marginal / spike marginal) for a N(0, v I) slab against a point mass."""
    d = mean.shape[0]
    sign, log_det = np.linalg.slogdet(covariance)
    quad = float(mean @ np.linalg.solve(covariance, mean))
    return -0.5 * d * np.log(slab_variance) + 0.5 * log_det + 0.5 * quad


def _spike_from_log_ratio(log_ratio: float, pi0: float) -> float:
    with np.errstate(divide='ignore'):
        log_odds = np.log(pi0) - np.log1p(-pi0) - log_ratio
    return float(expit(log_odds))


def spike_probability(mean: np.ndarray, covariance: np.ndarray, slab_variance: float, pi0: float) -> float:
    """Conditional probability l_j that a block sits at the point mass.

    l_j = pi0 / (pi0 + (1 - pi0) exp(s)), s = -(d/2) log v + (1/2) log|Sigma| + (1/2) mu' Sigma^-1 mu.
    """
    return _spike_from_log_ratio(log_slab_to_spike_ratio(mean, covariance, slab_variance), pi0)


def spike_probability_from_posterior(post: BlockPosterior, slab_variance: float, pi0: float) -> float:
    d = post.mean.shape[0]
    log_ratio = -0.5 * d * np.log(slab_variance) + 0.5 * post.log_det_covariance + 0.5 * post.quadratic
    return _spike_from_log_ratio(log_ratio, pi0)


def draw_block(rng: RngHandle, post: BlockPosterior, slab_variance: float, pi0: Optional[float]):
    """Draw a block from its (spike-and-)slab conditional.

    pi0 of None means no point mass. A uniform is consumed only when the spike
    probability is positive, so pi0 = 0 reproduces the slab-only stream exactly.
    Returns (draw, included).
    """
    if pi0 is not None:
        spike = spike_probability_from_posterior(post, slab_variance, pi0)
        if spike > 0.0 and rng.uniform() < spike:
            return np.zeros_like(post.mean), False
    draw = draw_from_precision_factor(rng, post.mean, post.chol)
    if not np.any(draw != 0.0):
        raise SamplerStateError('slab draw is exactly zero')
    return draw, True


class GibbsSampler:
    """Base sampler: owns the expanded design and the running linear predictor.

    Subclasses implement initial_state() and sweep(state, rng).
    """
    method: str = None
    spike: bool = True

    def __init__(self, dataset: Dataset, spline: SplineConfig, store_latents: bool = True):
        self.dataset = dataset
        self.spline = spline
        self.design = expand_design(dataset, spline)
        self.y = dataset.y
        self.e = dataset.e
        self.blocks = self.design.blocks
        self.store_latents = store_latents
        self.fit = np.zeros(dataset.n)

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def q(self) -> int:
        return self.dataset.q

    @property
    def d(self) -> int:
        return self.spline.basis_count

    def refresh_fit(self, state):
        """Recompute E beta + sum_j Z_j alpha_j from scratch."""
        self.fit = self.design.linear_predictor(state.alpha)
        if self.q:
            self.fit = self.fit + self.e @ state.beta
        return self.fit

    def residual(self) -> np.ndarray:
        return self.y - self.fit

    def partial_residual(self, state, j: int) -> np.ndarray:
        return self.y - self.fit + self.blocks[j] @ state.alpha[j]

    def set_block(self, state, j: int, value: np.ndarray):
        self.fit = self.fit + self.blocks[j] @ (value - state.alpha[j])
        state.alpha[j] = value

    def set_beta(self, state, value: np.ndarray):
        self.fit = self.fit + self.e @ (value - state.beta)
        state.beta = value

    def initial_state(self):
        raise NotImplementedError

    def sweep(self, state, rng: RngHandle):
        raise NotImplementedError

    def snapshot(self, state) -> Dict[str, np.ndarray]:
        return state.snapshot(self.store_latents)

    def run(self, iterations: int, burn_in: int, thin: int, rng: RngHandle,
            log_every: int = 1000, state=None) -> ChainDraws:
        if iterations <= burn_in:
            raise ValueError('iterations must exceed burn_in')
        if (iterations - burn_in) // thin == 0:
            raise ValueError('no draws would be stored after burn-in and thinning')
        state = state if state is not None else self.initial_state()
        logger.info(
            f"Running {self.method} chain {rng.stream_id}: {iterations} iterations, "
            f"burn-in {burn_in}, thin {thin}, n={self.n}, p={self.p}, d={self.d}"
        )
        started = time.perf_counter()
        stored: List[Dict[str, np.ndarray]] = []
        for it in range(1, iterations + 1):
            self.sweep(state, rng)
            if it > burn_in and (it - burn_in) % thin == 0:
                state.check_invariants()
                stored.append(self.snapshot(state))
            if it % log_every == 0:
                logger.info(f"{self.method} chain {rng.stream_id}: iteration {it}/{iterations}")
        logger.info(
            f"{self.method} chain {rng.stream_id} finished: {len(stored)} draws stored "
            f"in {time.perf_counter() - started:.1f}s"
        )
        return ChainDraws.from_snapshots(rng.stream_id, stored)
