"""Gelman-Rubin potential scale reduction factor."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

from config.study_config import study_config
from vcselect.errors import ConfigurationError
from vcselect.models import PosteriorSamples

logger = logging.getLogger(__name__)

PSRF_CUTOFF = study_config.PSRF_CUTOFF


@dataclass
class PsrfReport:
    names: List[str]
    values: np.ndarray
    degenerate: np.ndarray
    iteration: int
    cutoff: float = PSRF_CUTOFF
    trace: List[Dict] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return bool(np.all(self.values <= self.cutoff))

    def as_dict(self) -> Dict:
        return {
            'iteration': self.iteration,
            'cutoff': self.cutoff,
            'converged': self.converged,
            'max_psrf': float(np.max(self.values)) if self.values.size else None,
            'psrf': {name: float(v) for name, v in zip(self.names, self.values)},
            'degenerate': [name for name, flag in zip(self.names, self.degenerate) if flag],
            'trace': self.trace,
        }


def _as_chain_array(chains) -> np.ndarray:
    arr = np.asarray(chains, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError('chains must have shape (m, n_iter) or (m, n_iter, k)')
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError('PSRF needs at least 2 chains of length at least 2')
    return arr


def psrf_with_flags(chains) -> Tuple[np.ndarray, np.ndarray]:
    """PSRF per parameter plus a flag for zero within-chain variance.

    Zero W with equal chains reports 1; zero W with distinct chain means reports inf.
    """
    arr = _as_chain_array(chains)
    n = arr.shape[1]
    means = arr.mean(axis=1)
    between = n * means.var(axis=0, ddof=1)
    within = arr.var(axis=1, ddof=1).mean(axis=0)
    var_plus = (n - 1.0) / n * within + between / n
    degenerate = within == 0.0
    values = np.empty_like(within)
    values[~degenerate] = np.sqrt(var_plus[~degenerate] / within[~degenerate])
    values[degenerate] = np.where(between[degenerate] == 0.0, 1.0, np.inf)
    return values, degenerate


def psrf(chains) -> np.ndarray:
    values, _ = psrf_with_flags(chains)
    return values


def psrf_trace(chains, checkpoints: Iterable[int]) -> List[np.ndarray]:
    """PSRF on the prefixes of every chain ending at each checkpoint."""
    arr = _as_chain_array(chains)
    return [psrf(arr[:, :c]) for c in checkpoints]


def split_chain(chain: np.ndarray) -> np.ndarray:
    """Halve one chain (n_iter, k) into two pseudo-chains of equal length."""
    half = chain.shape[0] // 2
    return np.stack([chain[:half], chain[half:2 * half]])


def tracked_parameters(samples: PosteriorSamples, selected: List[int],
                       track_all: bool = False) -> Tuple[List[str], List[np.ndarray]]:
    """Per-chain (n_iter, k) arrays of the varying intercept and the selected blocks' spline coefficients,
    plus theta (quantile models) or sigma^2 (Gaussian models)."""
    first = samples.chains[0].draws['alpha']
    p, d = first.shape[1] - 1, first.shape[2]
    blocks = list(range(p + 1)) if track_all else [0] + sorted(selected)
    scale = 'theta' if 'theta' in samples.parameter_names else 'sigma_sq'
    names = [f'alpha_{j}_{s}' for j in blocks for s in range(d)] + [scale]
    arrays = []
    for chain in samples.chains:
        coefficients = chain.draws['alpha'][:, blocks, :].reshape(chain.size, -1)
        arrays.append(np.column_stack([coefficients, chain.draws[scale]]))
    return names, arrays


def checkpoint_schedule(length: int, step: int) -> List[int]:
    points = list(range(step, length + 1, step))
    if not points or points[-1] != length:
        points.append(length)
    return points


def _stack_prefix(arrays: List[np.ndarray], length: int, split: bool) -> np.ndarray:
    """Chains of the first `length` stored draws; split mode halves that prefix of every chain."""
    if split:
        return np.concatenate([split_chain(a[:length]) for a in arrays])
    return np.stack([a[:length] for a in arrays])


def diagnose(samples: PosteriorSamples, selected: List[int], split: bool = False,
             checkpoint_step: int = study_config.PSRF_CHECKPOINT_STEP, track_all: bool = False,
             cutoff: float = PSRF_CUTOFF) -> PsrfReport:
    names, arrays = tracked_parameters(samples, selected, track_all)
    if len(arrays) < 2 and not split:
        raise ConfigurationError('PSRF needs at least 2 chains; rerun with chains >= 2 or use split mode')
    length = min(a.shape[0] for a in arrays)
    chains = _stack_prefix(arrays, length, split)
    values, degenerate = psrf_with_flags(chains)

    trace = []
    shortest = 4 if split else 2
    for c in checkpoint_schedule(length, min(checkpoint_step, length)):
        if c < shortest:
            continue
        at = psrf(_stack_prefix(arrays, c, split))
        trace.append({
            'draws': c,
            'iteration': samples.burn_in + c * samples.thin,
            'max_psrf': float(np.max(at)),
            'psrf': {name: float(v) for name, v in zip(names, at)},
        })
    report = PsrfReport(
        names=names, values=values, degenerate=degenerate,
        iteration=samples.burn_in + length * samples.thin, cutoff=cutoff, trace=trace,
    )
    logger.info(
        f"PSRF over {len(names)} parameters from {chains.shape[0]} chains: "
        f"max {np.max(values):.4f}, converged={report.converged}"
    )
    return report
