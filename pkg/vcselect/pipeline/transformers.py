import logging
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from vcselect.basis import basis_matrix, evaluation_grid, expand_design
from vcselect.diagnostics import PsrfReport
from vcselect.errors import DataValidationError
from vcselect.inference import (
    CurveEstimate,
    ci_selection,
    curve_estimates,
    fitted_quantile,
    inclusion_probabilities,
    posterior_scalar_summaries,
)
from vcselect.metrics import average_curves, classify_fit, coverage, imse, pmad, pmse, timse
from vcselect.models import Dataset, PosteriorSamples
from vcselect.schemas import RunConfig
from vcselect.simulate import TrueCurves

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ['j', 'v', 'median', 'lower', 'upper']


def curves_frame(estimates: List[CurveEstimate], indices: Optional[List[int]] = None) -> pd.DataFrame:
    """Long table with one row per (curve, grid point)."""
    indices = indices if indices is not None else list(range(len(estimates)))
    frames = [
        pd.DataFrame({'j': j, 'v': c.grid, 'median': c.median, 'lower': c.lower, 'upper': c.upper})
        for j, c in zip(indices, estimates)
    ]
    return pd.concat(frames, ignore_index=True)[CURVE_COLUMNS]


def curves_from_frame(frame: pd.DataFrame) -> Dict[int, CurveEstimate]:
    missing = set(CURVE_COLUMNS) - set(frame.columns)
    if missing:
        raise DataValidationError(f'curve table lacks columns {sorted(missing)}')
    curves = {}
    for j, group in frame.groupby('j', sort=True):
        curves[int(j)] = CurveEstimate(
            grid=group['v'].to_numpy(), median=group['median'].to_numpy(),
            lower=group['lower'].to_numpy(), upper=group['upper'].to_numpy(),
        )
    return curves


def truth_curves(truth: Dict[str, Any]) -> TrueCurves:
    curves = truth['curves']
    return TrueCurves(p=int(curves['p']), hard_intercept=bool(curves['hard_intercept']),
                      support=list(truth['support']))


class FitTransformer:
    """Turns posterior draws into summaries, and summaries plus truth into metrics."""

    def summarize(self, samples: PosteriorSamples, dataset: Dataset, config: RunConfig,
                  wall_clock: float = None) -> Tuple[Dict[str, Any], pd.DataFrame]:
        grid = evaluation_grid(config.grid_size)
        grid_basis = basis_matrix(grid, config.spline)
        summary: Dict[str, Any] = {
            'method': samples.method,
            'tau': samples.tau,
            'n': dataset.n,
            'p': dataset.p,
            'q': dataset.q,
            'd': config.spline.basis_count,
            'chains': len(samples.chains),
            'stream_ids': [c.stream_id for c in samples.chains],
            'stored_draws_per_chain': samples.stored_count,
            'wall_clock_seconds': wall_clock,
        }
        if config.is_spike:
            inclusion = inclusion_probabilities(samples, config.threshold)
            summary['selection_rule'] = 'median_probability_model'
            summary['inclusion_probabilities'] = inclusion.probs
            summary['selected'] = inclusion.selected
        else:
            summary['selection_rule'] = 'credible_interval'
            summary['ci_level'] = config.ci_level
            summary['selected'] = ci_selection(samples, config.ci_level)
        summary['scalars'] = posterior_scalar_summaries(samples, config.ci_level)

        fitted = fitted_quantile(samples, expand_design(dataset, config.spline), dataset)
        summary['in_sample'] = {'pmse': pmse(dataset.y, fitted), 'pmad': pmad(dataset.y, fitted)}
        estimates = curve_estimates(samples, grid_basis, grid, config.ci_level)
        logger.info(f"Summarized {samples.method} fit: selected {summary['selected']}")
        return summary, curves_frame(estimates)

    def evaluate(self, summary: Dict[str, Any], curves: pd.DataFrame, truth: Dict[str, Any]) -> Dict[str, Any]:
        """Selection label, IMSE and coverage per curve, and TIMSE over all p + 1 curves."""
        true = truth_curves(truth)
        estimates = curves_from_frame(curves)
        if true.p != summary['p'] or sorted(estimates) != list(range(true.p + 1)):
            raise DataValidationError(
                f"truth describes p={true.p} but the fit has p={summary['p']} and {len(estimates)} curves"
            )
        imses, coverages = {}, {}
        for j, est in estimates.items():
            target = true.gamma(j, est.grid)
            imses[j] = imse(est.median, target)
            coverages[j] = coverage(est.lower, est.upper, target)
        label = classify_fit(summary['selected'], true.support)
        metrics = {
            'fit_class': label.value,
            'selected': summary['selected'],
            'support': true.support,
            'imse': {str(j): v for j, v in imses.items()},
            'timse': timse(list(imses.values())),
            'coverage': {str(j): v for j, v in coverages.items()},
            'in_sample': summary.get('in_sample'),
        }
        logger.info(f"Evaluated fit: {label.value}, TIMSE {metrics['timse']:.4f}")
        return metrics

    def fit_row(self, cell: Dict[str, Any], replicate: int, seed: int, metrics: Dict[str, Any],
                summary: Dict[str, Any], report: Optional[PsrfReport] = None,
                curve_indices=(0, 1, 2, 3)) -> Dict[str, Any]:
        """Flat row for the per-replicate study table; PSRF columns only for multi-chain fits."""
        row = {**cell, 'replicate': replicate, 'seed': seed, 'fit_class': metrics['fit_class'],
               'timse': metrics['timse'], 'selected': ' '.join(str(j) for j in metrics['selected']),
               'wall_clock_seconds': summary.get('wall_clock_seconds')}
        for j in curve_indices:
            if str(j) in metrics['imse']:
                row[f'imse_{j}'] = metrics['imse'][str(j)]
                row[f'coverage_{j}'] = metrics['coverage'][str(j)]
        if report is not None:
            row['max_psrf'] = float(report.values.max())
            row['converged'] = bool(report.converged)
        return row


def curve_subset(curves: pd.DataFrame, indices=(0, 1, 2, 3)) -> pd.DataFrame:
    return curves[curves['j'].isin(list(indices))].reset_index(drop=True)


def mean_curve_frame(frames: List[pd.DataFrame]) -> pd.DataFrame:
    """Replicate-averaged curve tables, matched on (j, v) position."""
    per_replicate = [curves_from_frame(f) for f in frames]
    indices = sorted(per_replicate[0])
    averaged = [average_curves([c[j] for c in per_replicate]) for j in indices]
    return curves_frame(averaged, indices)


def stack_rows(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    return frame.sort_values(['cell', 'replicate'], kind='stable').reset_index(drop=True)
