"""Selection and estimation accuracy across simulation replicates."""
from enum import Enum
from typing import Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

from vcselect.inference import CurveEstimate


class FitClassification(str, Enum):
    CORRECT = 'C'
    OVER = 'O'
    UNDER = 'U'


def classify_fit(selected: Iterable[int], truth: Iterable[int]) -> FitClassification:
    """C for an exact match, U when any true index is missed, O for a strict superset."""
    selected, truth = set(selected), set(truth)
    if selected == truth:
        return FitClassification.CORRECT
    if not truth <= selected:
        return FitClassification.UNDER
    return FitClassification.OVER


def _same_shape(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f'shape mismatch: {a.shape} vs {b.shape}')
    return a, b


def imse(estimate, truth) -> float:
    estimate, truth = _same_shape(estimate, truth)
    return float(np.mean((estimate - truth) ** 2))


def timse(per_curve_imse: Sequence[float]) -> float:
    return float(np.sum(per_curve_imse))


def coverage(lower, upper, truth) -> float:
    """Fraction of grid points where lower <= truth <= upper."""
    lower, truth = _same_shape(lower, truth)
    upper, _ = _same_shape(upper, truth)
    return float(np.mean((lower <= truth) & (truth <= upper)))


def pmse(y, yhat) -> float:
    y, yhat = _same_shape(y, yhat)
    return float(np.mean((y - yhat) ** 2))


def pmad(y, yhat) -> float:
    y, yhat = _same_shape(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def format_mean_sd(values, digits: int = 2) -> str:
    values = np.asarray(values, dtype=float)
    sd = values.std(ddof=1) if values.size > 1 else 0.0
    return f"{values.mean():.{digits}f}({sd:.{digits}f})"


def aggregate_replicates(fits: pd.DataFrame) -> Dict:
    """Aggregate row over replicate rows: fit_class, timse, coverage_<j>, and converged/max_psrf when present."""
    counts = fits['fit_class'].value_counts(normalize=True)
    row = {
        'replicates': int(len(fits)),
        'C': float(counts.get('C', 0.0)),
        'O': float(counts.get('O', 0.0)),
        'U': float(counts.get('U', 0.0)),
        'timse_mean': float(fits['timse'].mean()),
        'timse_sd': float(fits['timse'].std(ddof=1)) if len(fits) > 1 else 0.0,
        'timse': format_mean_sd(fits['timse']),
    }
    for column in fits.columns:
        if column.startswith('coverage_'):
            row[column] = float(fits[column].mean())
    if 'converged' in fits.columns:
        converged = fits['converged'].dropna().astype(bool)
        row['converged'] = float(converged.mean()) if len(converged) else float('nan')
        row['max_psrf_median'] = float(fits['max_psrf'].median())
    return row


def average_curves(estimates: List[CurveEstimate]) -> CurveEstimate:
    """Pointwise average of median and band over replicates."""
    if not estimates:
        raise ValueError('no curve estimates to average')
    return CurveEstimate(
        grid=estimates[0].grid,
        median=np.mean([c.median for c in estimates], axis=0),
        lower=np.mean([c.lower for c in estimates], axis=0),
        upper=np.mean([c.upper for c in estimates], axis=0),
    )


def imse_percentile_replicates(imses: Sequence[float], percentiles=(25, 50, 75)) -> List[int]:
    """Replicate index whose IMSE is closest to each requested percentile."""
    imses = np.asarray(imses, dtype=float)
    targets = np.percentile(imses, percentiles)
    return [int(np.argmin(np.abs(imses - t))) for t in targets]
