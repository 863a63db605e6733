from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from vcselect.errors import SamplerStateError


def as_columns(values, n: int) -> np.ndarray:
    """n-row float matrix; a 1-D input becomes one column and an empty input has zero columns."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return np.zeros((n, 0))
    return arr.reshape(n, -1)


@dataclass
class Dataset:
    """Response, predictors (column 0 is the all-ones intercept column), clinical covariates and index variable."""
    y: np.ndarray
    x: np.ndarray
    v: np.ndarray
    e: np.ndarray = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.e is None:
            self.e = np.zeros((self.y.shape[0], 0))
        self.e = as_columns(self.e, self.y.shape[0])

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1] - 1

    @property
    def q(self) -> int:
        return self.e.shape[1]

    @classmethod
    def from_predictors(cls, y, x_without_intercept, v, e=None) -> "Dataset":
        x_without_intercept = as_columns(x_without_intercept, len(y))
        x = np.hstack([np.ones((len(y), 1)), x_without_intercept])
        return cls(y=y, x=x, v=v, e=e)


@dataclass
class ExpandedDesign:
    """Blocks Z_ij = pi(V_i) X_ij stacked as an array of shape (p + 1, n, d); block 0 is the varying intercept."""
    blocks: np.ndarray

    @property
    def p(self) -> int:
        return self.blocks.shape[0] - 1

    @property
    def n(self) -> int:
        return self.blocks.shape[1]

    @property
    def d(self) -> int:
        return self.blocks.shape[2]

    def linear_predictor(self, alpha: np.ndarray) -> np.ndarray:
        return np.einsum('jnd,jd->n', self.blocks, alpha)


@dataclass
class SamplerState:
    alpha: np.ndarray
    beta: np.ndarray
    u_tilde: np.ndarray
    g: np.ndarray
    theta: float
    eta_sq: float
    pi0: float
    inclusion: np.ndarray

    def check_invariants(self):
        nonzero = np.any(self.alpha[1:] != 0.0, axis=1)
        if not np.array_equal(nonzero, self.inclusion.astype(bool)):
            raise SamplerStateError('inclusion flags disagree with the zero pattern of alpha')
        if np.any(self.u_tilde <= 0) or np.any(self.g <= 0) or self.theta <= 0 or self.eta_sq <= 0:
            raise SamplerStateError('latent scales must stay strictly positive')
        if not 0.0 <= self.pi0 <= 1.0:
            raise SamplerStateError(f'pi0 outside [0, 1]: {self.pi0}')

    def snapshot(self, store_latents: bool = True) -> Dict[str, np.ndarray]:
        draw = {
            'alpha': self.alpha.copy(),
            'beta': self.beta.copy(),
            'g': self.g.copy(),
            'theta': np.float64(self.theta),
            'eta_sq': np.float64(self.eta_sq),
            'pi0': np.float64(self.pi0),
            'inclusion': self.inclusion.copy(),
        }
        if store_latents:
            draw['u_tilde'] = self.u_tilde.copy()
        return draw


@dataclass
class GaussianSamplerState:
    alpha: np.ndarray
    beta: np.ndarray
    sigma_sq: float
    zeta_sq: np.ndarray
    lambda_sq: float
    pi0: float
    inclusion: np.ndarray

    def check_invariants(self):
        nonzero = np.any(self.alpha[1:] != 0.0, axis=1)
        if not np.array_equal(nonzero, self.inclusion.astype(bool)):
            raise SamplerStateError('inclusion flags disagree with the zero pattern of alpha')
        if self.sigma_sq <= 0 or self.lambda_sq <= 0 or np.any(self.zeta_sq <= 0):
            raise SamplerStateError('variance parameters must stay strictly positive')
        if not 0.0 <= self.pi0 <= 1.0:
            raise SamplerStateError(f'pi0 outside [0, 1]: {self.pi0}')

    def snapshot(self, store_latents: bool = True) -> Dict[str, np.ndarray]:
        return {
            'alpha': self.alpha.copy(),
            'beta': self.beta.copy(),
            'zeta_sq': self.zeta_sq.copy(),
            'sigma_sq': np.float64(self.sigma_sq),
            'lambda_sq': np.float64(self.lambda_sq),
            'pi0': np.float64(self.pi0),
            'inclusion': self.inclusion.copy(),
        }


@dataclass
class ChainDraws:
    """Stored post-burn-in draws of one chain, one array per parameter with the draw index first."""
    stream_id: int
    draws: Dict[str, np.ndarray]

    @property
    def size(self) -> int:
        return next(iter(self.draws.values())).shape[0]

    def prefix(self, length: int) -> "ChainDraws":
        return ChainDraws(self.stream_id, {k: v[:length] for k, v in self.draws.items()})

    @classmethod
    def from_snapshots(cls, stream_id: int, snapshots: List[Dict[str, np.ndarray]]) -> "ChainDraws":
        keys = snapshots[0].keys()
        return cls(stream_id, {k: np.stack([s[k] for s in snapshots]) for k in keys})


@dataclass
class PosteriorSamples:
    method: str
    tau: Optional[float]
    iterations: int
    burn_in: int
    thin: int
    seed: int
    degree: int
    interior_knots: int
    chains: List[ChainDraws] = field(default_factory=list)

    @property
    def stored_count(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    @property
    def parameter_names(self) -> List[str]:
        return list(self.chains[0].draws.keys()) if self.chains else []

    def pooled(self, name: str) -> np.ndarray:
        """Draws of one parameter with all chains concatenated along the draw axis."""
        return np.concatenate([c.draws[name] for c in self.chains], axis=0)

    def metadata(self) -> Dict:
        return {
            'method': self.method,
            'tau': self.tau,
            'iterations': self.iterations,
            'burn_in': self.burn_in,
            'thin': self.thin,
            'seed': self.seed,
            'degree': self.degree,
            'interior_knots': self.interior_knots,
            'stream_ids': [c.stream_id for c in self.chains],
        }
