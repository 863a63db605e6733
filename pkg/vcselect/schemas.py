from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from config.study_config import study_config

Method = Literal["bqrvcss", "bqrvc", "bvcss", "bvc"]
CovariateKind = Literal["gene", "snp"]
ErrorKind = Literal["normal", "normal_mixture", "laplace", "lognormal", "t2"]

SPIKE_METHODS = ("bqrvcss", "bvcss")
QUANTILE_METHODS = ("bqrvcss", "bqrvc")


def _check_spd(matrix: Optional[List[List[float]]], name: str):
    if matrix is None:
        return matrix
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f'{name} must be a square matrix')
    if not np.allclose(arr, arr.T):
        raise ValueError(f'{name} must be symmetric')
    try:
        np.linalg.cholesky(arr)
    except np.linalg.LinAlgError:
        raise ValueError(f'{name} must be positive-definite')
    return matrix


def _covariance(matrix: Optional[List[List[float]]], scale: float, size: int, name: str) -> np.ndarray:
    if matrix is None:
        return scale * np.eye(size)
    arr = np.asarray(matrix, dtype=float)
    if arr.shape != (size, size):
        raise ValueError(f'{name} has shape {arr.shape}, expected ({size}, {size})')
    return arr


# Spline schemas
class SplineConfig(BaseModel):
    degree: int = Field(2, ge=0)
    interior_knots: int = Field(2, ge=0)

    @property
    def basis_count(self) -> int:
        return self.interior_knots + self.degree + 1

    def label(self) -> str:
        return f"O{self.degree}N{self.interior_knots}"


# Prior schemas
class CovariancePriors(BaseModel):
    sigma_beta: Optional[List[List[float]]] = None
    sigma_alpha0: Optional[List[List[float]]] = None
    sigma_beta_scale: float = Field(100.0, gt=0)
    sigma_alpha0_scale: float = Field(100.0, gt=0)

    @field_validator('sigma_beta', 'sigma_alpha0')
    def validate_spd(cls, v, info):
        return _check_spd(v, info.field_name)

    def sigma_beta_matrix(self, q: int) -> np.ndarray:
        return _covariance(self.sigma_beta, self.sigma_beta_scale, q, 'sigma_beta')

    def sigma_alpha0_matrix(self, d: int) -> np.ndarray:
        return _covariance(self.sigma_alpha0, self.sigma_alpha0_scale, d, 'sigma_alpha0')


class PriorConfig(CovariancePriors):
    """Hyperparameters of the quantile samplers (BQRVCSS, BQRVC)."""
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    c: float = Field(1.0, gt=0)
    m: float = Field(1.0, gt=0)
    e: float = Field(1.0, gt=0)
    f: float = Field(1.0, gt=0)


class GaussianPriorConfig(CovariancePriors):
    """Hyperparameters of the Gaussian samplers (BVCSS, BVC).

    `a`, `b` here are the Beta prior of pi0, not the Gamma prior of theta.
    """
    s: float = Field(1.0, gt=0)
    h: float = Field(1.0, gt=0)
    t: float = Field(1.0, gt=0)
    psi: float = Field(1.0, gt=0)
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)


# MCMC schemas
class McmcOptions(BaseModel):
    iterations: int = Field(10000, ge=1)
    burn_in: int = Field(5000, ge=0)
    thin: int = Field(1, ge=1)
    chains: int = Field(1, ge=1)
    seed: int = Field(2024, ge=0, lt=2 ** 64)
    log_every: int = Field(study_config.LOG_EVERY, ge=1)

    @model_validator(mode='after')
    def validate_lengths(self):
        if self.iterations <= self.burn_in:
            raise ValueError('iterations must exceed burn_in')
        if self.stored_count == 0:
            raise ValueError('no draws would be stored after burn-in and thinning')
        return self

    @property
    def stored_count(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


# Simulation schemas
class ScenarioSpec(BaseModel):
    n: int = Field(200, ge=1)
    p: int = Field(100, ge=1)
    covariate_kind: CovariateKind = "gene"
    error_kind: ErrorKind = "normal"
    heteroscedastic: bool = False
    tau: float = Field(0.5, gt=0, lt=1)
    seed: int = Field(2024, ge=0, lt=2 ** 64)
    ar_rho: float = Field(0.5, gt=-1, lt=1)
    mixture_scale: Literal["variance", "sd"] = "variance"
    hard_intercept: bool = False
    clinical_covariates: int = Field(0, ge=0)

    @field_validator('p')
    def validate_p(cls, v):
        if v < 3:
            raise ValueError('p must be at least 3 so the true support {1, 2, 3} exists')
        return v

    def label(self) -> str:
        errors = "hetero" if self.heteroscedastic else "iid"
        hard = "_hard" if self.hard_intercept else ""
        return f"{self.covariate_kind}_{errors}_{self.error_kind}{hard}"


# Run schemas
class RunConfig(BaseModel):
    method: Method = "bqrvcss"
    tau: float = Field(0.5, gt=0, lt=1)
    spline: SplineConfig = Field(default_factory=SplineConfig)
    priors: PriorConfig = Field(default_factory=PriorConfig)
    gaussian_priors: GaussianPriorConfig = Field(default_factory=GaussianPriorConfig)
    mcmc: McmcOptions = Field(default_factory=McmcOptions)
    data_path: Optional[str] = None
    truth_path: Optional[str] = None
    output_dir: Optional[str] = None
    grid_size: int = Field(study_config.GRID_SIZE, ge=2)
    threshold: float = Field(0.5, ge=0, le=1)
    ci_level: float = Field(0.95, gt=0, lt=1)
    track_all_coefficients: bool = False
    store_latents: bool = True

    @property
    def is_spike(self) -> bool:
        return self.method in SPIKE_METHODS

    @property
    def is_quantile(self) -> bool:
        return self.method in QUANTILE_METHODS


class StudyGrid(BaseModel):
    """A scenario × method × tau × spline × pi0-prior grid with R replicates per cell."""
    scenarios: List[ScenarioSpec] = Field(default_factory=lambda: [ScenarioSpec()])
    methods: List[Method] = Field(default_factory=lambda: ["bqrvcss"])
    taus: List[float] = Field(default_factory=lambda: [0.5])
    splines: List[SplineConfig] = Field(default_factory=lambda: [SplineConfig()])
    pi0_priors: List[Tuple[float, float]] = Field(default_factory=lambda: [(1.0, 1.0)])
    replicates: int = Field(10, ge=1)
    base_seed: int = Field(2024, ge=0)
    mcmc: McmcOptions = Field(default_factory=McmcOptions)
    priors: PriorConfig = Field(default_factory=PriorConfig)
    gaussian_priors: GaussianPriorConfig = Field(default_factory=GaussianPriorConfig)
    grid_size: int = Field(study_config.GRID_SIZE, ge=2)
    psrf_cutoff: float = Field(study_config.PSRF_CUTOFF, ge=1)
    output_dir: Optional[str] = None

    @field_validator('taus')
    def validate_taus(cls, v):
        for tau in v:
            if not 0 < tau < 1:
                raise ValueError(f'tau must lie in (0, 1), got {tau}')
        return v

    @field_validator('pi0_priors')
    def validate_pi0_priors(cls, v):
        for e, f in v:
            if e <= 0 or f <= 0:
                raise ValueError(f'Beta prior parameters must be positive, got ({e}, {f})')
        return v
