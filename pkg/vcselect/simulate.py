"""Simulation scenarios: gene-expression or SNP predictors, i.i.d. or heteroscedastic errors."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import linalg, optimize, stats

from vcselect.errors import ConfigurationError, DataValidationError
from vcselect.models import Dataset, as_columns
from vcselect.rng import RngHandle, cholesky_lower
from vcselect.schemas import ScenarioSpec

logger = logging.getLogger(__name__)

TRUE_SUPPORT = [1, 2, 3]
MIXTURE_WEIGHT = 0.2
# stream id of simulated data; chains use 0..chains-1
SIMULATION_STREAM = 2 ** 32


def true_gamma(j: int, v, hard_intercept: bool = False):
    v = np.asarray(v, dtype=float)
    if j < 0:
        raise ValueError(f'curve index must be non-negative, got {j}')
    if j == 0:
        frequency = 6.0 if hard_intercept else 2.0
        return 2.0 + 2.0 * np.sin(frequency * np.pi * v)
    if j == 1:
        return 2.0 * np.exp(2.0 * v - 1.0)
    if j == 2:
        return -6.0 * v * (1.0 - v)
    if j == 3:
        return -4.0 * v ** 3
    return np.zeros_like(v)


@dataclass
class TrueCurves:
    p: int
    hard_intercept: bool = False
    support: List[int] = field(default_factory=lambda: list(TRUE_SUPPORT))

    def gamma(self, j: int, v):
        if j > self.p:
            raise ValueError(f'curve index {j} exceeds p={self.p}')
        return true_gamma(j, v, self.hard_intercept)

    def matrix(self, v) -> np.ndarray:
        """All p + 1 curves evaluated at v, shape (p + 1, len(v))."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return np.vstack([self.gamma(j, v) for j in range(self.p + 1)])

    def to_dict(self):
        return {'p': self.p, 'hard_intercept': self.hard_intercept, 'support': self.support}


@dataclass
class SimulatedData:
    dataset: Dataset
    curves: TrueCurves
    beta: np.ndarray
    spec: ScenarioSpec

    @property
    def support(self) -> List[int]:
        return self.curves.support


def generate_gene_covariates(rng: RngHandle, n: int, p: int, rho: float = 0.5) -> np.ndarray:
    """Rows i.i.d. N(0, Sigma) with AR(1) correlation Sigma_jk = rho^|j-k|."""
    if n < 1 or p < 1:
        raise ConfigurationError('n and p must be positive')
    covariance = linalg.toeplitz(rho ** np.arange(p))
    chol = cholesky_lower(covariance, 'AR(1) covariance')
    return rng.standard_normal((n, p)) @ chol.T


def dichotomize_snp(gene_matrix: np.ndarray) -> np.ndarray:
    """Three-level genotype coding from each column's quartiles; ties at a quartile go to the middle class."""
    gene_matrix = np.asarray(gene_matrix, dtype=float)
    q1, q3 = np.quantile(gene_matrix, [0.25, 0.75], axis=0, method='linear')
    snp = np.ones_like(gene_matrix)
    snp[gene_matrix < q1] = 0.0
    snp[gene_matrix > q3] = 2.0
    return snp


def _mixture_sd(mixture_scale: str) -> float:
    if mixture_scale == 'variance':
        return float(np.sqrt(3.0))
    if mixture_scale == 'sd':
        return 3.0
    raise ConfigurationError(f'unknown mixture scale {mixture_scale}')


def error_quantile(error_kind: str, tau: float, mixture_scale: str = 'variance') -> float:
    """tau-quantile of the uncentered error law."""
    if not 0.0 < tau < 1.0:
        raise ConfigurationError(f'tau must lie in (0, 1), got {tau}')
    if error_kind == 'normal':
        return float(stats.norm.ppf(tau))
    if error_kind == 'laplace':
        return float(stats.laplace.ppf(tau))
    if error_kind == 'lognormal':
        return float(np.exp(stats.norm.ppf(tau)))
    if error_kind == 't2':
        return float((2.0 * tau - 1.0) / np.sqrt(2.0 * tau * (1.0 - tau)))
    if error_kind == 'normal_mixture':
        sd = _mixture_sd(mixture_scale)

        def cdf_gap(x):
            return (1.0 - MIXTURE_WEIGHT) * stats.norm.cdf(x) + MIXTURE_WEIGHT * stats.norm.cdf(x / sd) - tau

        return float(optimize.brentq(cdf_gap, -50.0, 50.0, xtol=1e-14))
    raise ConfigurationError(f'unknown error kind {error_kind}')


def _base_error_sample(rng: RngHandle, error_kind: str, n: int, mixture_scale: str) -> np.ndarray:
    if error_kind == 'normal':
        return rng.standard_normal(n)
    if error_kind == 'normal_mixture':
        wide = rng.uniform(n) < MIXTURE_WEIGHT
        return rng.standard_normal(n) * np.where(wide, _mixture_sd(mixture_scale), 1.0)
    if error_kind == 'laplace':
        return rng.generator.laplace(0.0, 1.0, n)
    if error_kind == 'lognormal':
        return np.exp(rng.standard_normal(n))
    if error_kind == 't2':
        return rng.generator.standard_t(2, n)
    raise ConfigurationError(f'unknown error kind {error_kind}')


def centered_error_sample(rng: RngHandle, error_kind: str, tau: float, n: int,
                          mixture_scale: str = 'variance') -> np.ndarray:
    """Errors whose tau-quantile is 0: base draws minus the base law's tau-quantile."""
    shift = error_quantile(error_kind, tau, mixture_scale)
    return _base_error_sample(rng, error_kind, n, mixture_scale) - shift


def generate_response(x: np.ndarray, v: np.ndarray, curves: TrueCurves, errors: np.ndarray,
                      heteroscedastic: bool = False, e: Optional[np.ndarray] = None,
                      beta: Optional[np.ndarray] = None) -> np.ndarray:
    """Y_i = gamma_0(V_i) + sum_j gamma_j(V_i) X_ij + E_i'beta + eps_i, eps_i scaled by (1 + X_i2) when heteroscedastic."""
    x = as_columns(x, len(v))
    y = curves.gamma(0, v).copy()
    for j in range(1, min(x.shape[1], 3) + 1):
        y += curves.gamma(j, v) * x[:, j - 1]
    if e is not None and e.shape[1]:
        y += e @ beta
    if heteroscedastic:
        if x.shape[1] < 2:
            raise DataValidationError('heteroscedastic errors need at least two predictors')
        return y + (1.0 + x[:, 1]) * errors
    return y + errors


def simulate_dataset(spec: ScenarioSpec) -> SimulatedData:
    """Draw V, then X, then E, then the errors from the simulation stream of spec.seed."""
    rng = RngHandle(spec.seed, SIMULATION_STREAM)
    v = rng.uniform(spec.n)
    x = generate_gene_covariates(rng, spec.n, spec.p, spec.ar_rho)
    if spec.covariate_kind == 'snp':
        x = dichotomize_snp(x)
    e = rng.standard_normal((spec.n, spec.clinical_covariates))
    beta = np.ones(spec.clinical_covariates)
    errors = centered_error_sample(rng, spec.error_kind, spec.tau, spec.n, spec.mixture_scale)
    curves = TrueCurves(p=spec.p, hard_intercept=spec.hard_intercept)
    y = generate_response(x, v, curves, errors, spec.heteroscedastic, e, beta)
    logger.info(f"Simulated scenario {spec.label()}: n={spec.n}, p={spec.p}, tau={spec.tau}, seed={spec.seed}")
    return SimulatedData(dataset=Dataset.from_predictors(y, x, v, e), curves=curves, beta=beta, spec=spec)
