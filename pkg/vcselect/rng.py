"""Seed-reproducible variates for the Gibbs conditionals.

Gamma-type distributions use the shape-rate convention throughout. Each chain owns
one RngHandle built on a counter-based Philox stream keyed by (seed, stream_id).
"""
import numpy as np
from scipy import linalg

from vcselect.errors import ConfigurationError, DecompositionError


class RngHandle:
    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self, size=None):
        return self.generator.random(size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)


def _require_positive(name: str, value):
    if np.any(np.asarray(value) <= 0):
        raise ConfigurationError(f'{name} must be positive')


def sample_inverse_gaussian(rng: RngHandle, mean, shape, size=None):
    """Inverse-Gaussian(mean, shape) by the Michael-Schucany-Haas transformation."""
    _require_positive('inverse-Gaussian mean', mean)
    _require_positive('inverse-Gaussian shape', shape)
    mean = np.asarray(mean, dtype=float)
    shape = np.asarray(shape, dtype=float)
    if size is None:
        size = np.broadcast(mean, shape).shape
    y = rng.standard_normal(size) ** 2
    phi = mean * y / (2.0 * shape)
    # smaller root of the quadratic, written without cancellation
    x = mean / (1.0 + phi + np.sqrt(phi * (phi + 2.0)))
    u = rng.uniform(size)
    draw = np.where(u <= mean / (mean + x), x, mean * mean / x)
    return draw if np.ndim(draw) else float(draw)


def sample_gamma(rng: RngHandle, shape, rate, size=None):
    _require_positive('gamma shape', shape)
    _require_positive('gamma rate', rate)
    return rng.generator.gamma(shape, 1.0 / np.asarray(rate, dtype=float), size)


def sample_inverse_gamma(rng: RngHandle, shape, scale, size=None):
    """Reciprocal of Gamma(shape, rate=scale)."""
    return 1.0 / sample_gamma(rng, shape, scale, size)


def sample_beta(rng: RngHandle, a, b, size=None):
    _require_positive('beta a', a)
    _require_positive('beta b', b)
    return rng.generator.beta(a, b, size)


def sample_exponential(rng: RngHandle, rate, size=None):
    _require_positive('exponential rate', rate)
    return rng.generator.exponential(1.0 / np.asarray(rate, dtype=float), size)


def sample_bernoulli(rng: RngHandle, prob, size=None):
    prob = np.asarray(prob, dtype=float)
    if np.any(prob < 0) or np.any(prob > 1):
        raise ConfigurationError('Bernoulli probability must lie in [0, 1]')
    draw = (rng.uniform(size) < prob).astype(int)
    return draw if np.ndim(draw) else int(draw)


def cholesky_lower(matrix: np.ndarray, name: str = 'matrix') -> np.ndarray:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as e:
        raise DecompositionError(f'Cholesky decomposition of {name} failed: {e}')


def sample_mvn(rng: RngHandle, mean, covariance):
    mean = np.asarray(mean, dtype=float)
    chol = cholesky_lower(np.asarray(covariance, dtype=float), 'covariance')
    return mean + chol @ rng.standard_normal(mean.shape[0])


def draw_from_precision_factor(rng: RngHandle, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """N(mean, P^-1) given the lower Cholesky factor of the precision P."""
    z = rng.standard_normal(mean.shape[0])
    return mean + linalg.solve_triangular(chol, z, lower=True, trans='T')


def sample_mvn_precision(rng: RngHandle, precision: np.ndarray, linear: np.ndarray):
    """Draw N(P^-1 b, P^-1) from precision P and linear term b.

    Returns the draw, the mean and the lower Cholesky factor of P.
    """
    chol = cholesky_lower(precision, 'posterior precision')
    mean = linalg.cho_solve((chol, True), linear)
    return draw_from_precision_factor(rng, mean, chol), mean, chol
