import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import List

from vcselect.models import ChainDraws, Dataset, PosteriorSamples
from vcselect.rng import RngHandle
from vcselect.samplers.bqrvcss import BQRVCSSSampler
from vcselect.samplers.engine import GibbsSampler
from vcselect.samplers.variants import BQRVCSampler, BVCSampler, BVCSSSampler
from vcselect.schemas import RunConfig

logger = logging.getLogger(__name__)


def build_sampler(dataset: Dataset, config: RunConfig) -> GibbsSampler:
    if config.method == 'bqrvcss':
        return BQRVCSSSampler(dataset, config.spline, config.priors, config.tau, config.store_latents)
    if config.method == 'bqrvc':
        return BQRVCSampler(dataset, config.spline, config.priors, config.tau, config.store_latents)
    if config.method == 'bvcss':
        return BVCSSSampler(dataset, config.spline, config.gaussian_priors, config.store_latents)
    if config.method == 'bvc':
        return BVCSampler(dataset, config.spline, config.gaussian_priors, config.store_latents)
    raise ValueError(f'unknown method {config.method}')


def _run_one_chain(dataset: Dataset, config: RunConfig, stream_id: int) -> ChainDraws:
    sampler = build_sampler(dataset, config)
    mcmc = config.mcmc
    return sampler.run(mcmc.iterations, mcmc.burn_in, mcmc.thin, RngHandle(mcmc.seed, stream_id), mcmc.log_every)


def fit_posterior(dataset: Dataset, config: RunConfig, max_workers: int = None) -> PosteriorSamples:
    """Run config.mcmc.chains independent chains (stream ids 0..chains-1) and merge them in stream order.

    max_workers=1 runs the chains one after another in this process.
    """
    mcmc = config.mcmc
    stream_ids = list(range(mcmc.chains))
    if mcmc.chains == 1 or max_workers == 1:
        chains: List[ChainDraws] = [_run_one_chain(dataset, config, s) for s in stream_ids]
    else:
        workers = max_workers or min(mcmc.chains, os.cpu_count() or 1)
        logger.info(f"Running {mcmc.chains} {config.method} chains on {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one_chain, dataset, config, s) for s in stream_ids]
            chains = [f.result() for f in futures]
    return PosteriorSamples(
        method=config.method,
        tau=config.tau if config.is_quantile else None,
        iterations=mcmc.iterations,
        burn_in=mcmc.burn_in,
        thin=mcmc.thin,
        seed=mcmc.seed,
        degree=config.spline.degree,
        interior_knots=config.spline.interior_knots,
        chains=chains,
    )
