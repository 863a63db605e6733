import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from vcselect.errors import SelectionMethodError
from vcselect.models import Dataset, ExpandedDesign, PosteriorSamples
from vcselect.schemas import SPIKE_METHODS

logger = logging.getLogger(__name__)

# Empirical quantiles interpolate linearly between order statistics.
QUANTILE_METHOD = 'linear'


@dataclass
class InclusionSummary:
    probs: np.ndarray
    selected: List[int]
    threshold: float = 0.5


@dataclass
class CurveEstimate:
    grid: np.ndarray
    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def _tails(level: float):
    return (1.0 - level) / 2.0, 1.0 - (1.0 - level) / 2.0


def inclusion_probabilities(samples: PosteriorSamples, threshold: float = 0.5) -> InclusionSummary:
    """Posterior inclusion probabilities p_j and the median probability model {j : p_j >= threshold}."""
    if samples.method not in SPIKE_METHODS:
        raise SelectionMethodError(
            f'{samples.method} has no point-mass prior; use ci_selection for its variable selection'
        )
    probs = samples.pooled('inclusion').astype(float).mean(axis=0)
    selected = [int(j) + 1 for j in np.nonzero(probs >= threshold)[0]]
    return InclusionSummary(probs=probs, selected=selected, threshold=threshold)


def ci_selection(samples: PosteriorSamples, level: float = 0.95) -> List[int]:
    """Select group j when any of its spline coefficients has an equal-tailed credible interval excluding 0."""
    coefficients = samples.pooled('alpha')[:, 1:, :]
    lower, upper = np.quantile(coefficients, _tails(level), axis=0, method=QUANTILE_METHOD)
    excludes_zero = np.any((lower > 0.0) | (upper < 0.0), axis=1)
    return [int(j) + 1 for j in np.nonzero(excludes_zero)[0]]


def selected_groups(samples: PosteriorSamples, threshold: float = 0.5, level: float = 0.95) -> List[int]:
    if samples.method in SPIKE_METHODS:
        return inclusion_probabilities(samples, threshold).selected
    return ci_selection(samples, level)


def curve_draws(samples: PosteriorSamples, grid_basis: np.ndarray, j: int) -> np.ndarray:
    """gamma_j^(m)(v_t) = alpha_j^(m)' pi(v_t) for every stored draw m and grid point t."""
    return samples.pooled('alpha')[:, j, :] @ grid_basis.T


def curve_estimate(samples: PosteriorSamples, grid_basis: np.ndarray, grid: np.ndarray, j: int,
                   level: float = 0.95) -> CurveEstimate:
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise ValueError('evaluation grid must lie within [0, 1]')
    draws = curve_draws(samples, grid_basis, j)
    lower, upper = np.quantile(draws, _tails(level), axis=0, method=QUANTILE_METHOD)
    return CurveEstimate(grid=grid, median=np.median(draws, axis=0), lower=lower, upper=upper)


def curve_estimates(samples: PosteriorSamples, grid_basis: np.ndarray, grid: np.ndarray,
                    level: float = 0.95) -> List[CurveEstimate]:
    p = samples.chains[0].draws['alpha'].shape[1] - 1
    return [curve_estimate(samples, grid_basis, grid, j, level) for j in range(p + 1)]


def _summary(draws: np.ndarray, level: float) -> Dict[str, float]:
    lower, upper = np.quantile(draws, _tails(level), method=QUANTILE_METHOD)
    return {'median': float(np.median(draws)), 'lower': float(lower), 'upper': float(upper)}


def posterior_scalar_summaries(samples: PosteriorSamples, level: float = 0.95) -> Dict[str, Dict[str, float]]:
    """Median and equal-tailed interval of beta_k and of each scalar hyperparameter."""
    summaries = {}
    beta = samples.pooled('beta')
    for k in range(beta.shape[1]):
        summaries[f'beta_{k + 1}'] = _summary(beta[:, k], level)
    for name in ('theta', 'sigma_sq', 'eta_sq', 'lambda_sq', 'pi0'):
        if name in samples.parameter_names:
            summaries[name] = _summary(samples.pooled(name), level)
    return summaries


def fitted_quantile(samples: PosteriorSamples, design: ExpandedDesign, dataset: Dataset) -> np.ndarray:
    """Posterior median of E_i'beta + sum_j alpha_j'Z_ij for every observation."""
    alpha = samples.pooled('alpha')
    predictor = np.einsum('mjd,jnd->mn', alpha, design.blocks)
    if dataset.q:
        predictor = predictor + samples.pooled('beta') @ dataset.e.T
    return np.median(predictor, axis=0)
