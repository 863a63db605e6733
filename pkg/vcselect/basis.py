import logging
from typing import Tuple

import numpy as np

from vcselect.errors import DataValidationError
from vcselect.models import Dataset, ExpandedDesign
from vcselect.schemas import SplineConfig

logger = logging.getLogger(__name__)


def knot_sequence(config: SplineConfig) -> np.ndarray:
    """Clamped knot vector on [0, 1]: boundaries repeated degree + 1 times, uniform interior knots."""
    interior = np.arange(1, config.interior_knots + 1) / (config.interior_knots + 1)
    return np.concatenate([
        np.zeros(config.degree + 1),
        interior,
        np.ones(config.degree + 1),
    ])


def evaluation_grid(size: int = 200) -> np.ndarray:
    return np.linspace(0.0, 1.0, size)


def recommended_knot_range(n: int, degree: int) -> Tuple[int, int]:
    """Interior-knot counts achieving the optimal n^{1/(2O+3)} order."""
    rate = n ** (1.0 / (2 * degree + 3))
    return max(int(0.5 * rate), 1), int(1.5 * rate)


def basis_matrix(v, config: SplineConfig) -> np.ndarray:
    """Normalized B-spline basis rows pi(v) for every v, shape (len(v), d), by Cox-de Boor recursion."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any(v < 0.0) or np.any(v > 1.0) or np.any(np.isnan(v)):
        raise DataValidationError('index variable values must lie in [0, 1]')

    t = knot_sequence(config)
    k = config.degree
    spans = len(t) - 1

    # Degree 0: indicator of the half-open span [t_i, t_{i+1}); v = 1 goes to the last
    # non-empty span (left limit) so no row is left empty.
    last = np.max(np.nonzero(t[:-1] < t[1:])[0])
    values = np.zeros((v.size, spans))
    for i in range(spans):
        if t[i] < t[i + 1]:
            values[:, i] = (t[i] <= v) & (v < t[i + 1])
    values[v == t[-1], last] = 1.0

    for r in range(1, k + 1):
        nxt = np.zeros((v.size, spans - r))
        for i in range(spans - r):
            left_den = t[i + r] - t[i]
            right_den = t[i + r + 1] - t[i + 1]
            if left_den > 0:
                nxt[:, i] += (v - t[i]) / left_den * values[:, i]
            if right_den > 0:
                nxt[:, i] += (t[i + r + 1] - v) / right_den * values[:, i + 1]
        values = nxt
    return values


def evaluate_basis(v: float, config: SplineConfig) -> np.ndarray:
    if not 0.0 <= v <= 1.0:
        raise DataValidationError(f'index variable must lie in [0, 1], got {v}')
    return basis_matrix([v], config)[0]


def expand_design(dataset: Dataset, config: SplineConfig) -> ExpandedDesign:
    if dataset.x.shape[0] != dataset.v.shape[0]:
        raise DataValidationError(
            f'X has {dataset.x.shape[0]} rows but V has {dataset.v.shape[0]} entries'
        )
    pi = basis_matrix(dataset.v, config)
    blocks = dataset.x.T[:, :, None] * pi[None, :, :]
    logger.debug(f"Expanded design: p={dataset.p}, n={dataset.n}, d={config.basis_count}")
    return ExpandedDesign(blocks=blocks)
