import logging
from typing import Any, Dict, Tuple

import numpy as np

from vcselect.models import Dataset
from vcselect.schemas import RunConfig

logger = logging.getLogger(__name__)


class BaseValidator:
    def validate(self, item) -> Tuple[bool, str]:
        """Returns (is_valid, error_message)"""
        raise NotImplementedError

    def _all_finite(self, values) -> bool:
        return bool(np.all(np.isfinite(values)))


# ---------------- DATASETS ----------------
class DatasetValidator(BaseValidator):
    def validate(self, dataset: Dataset):
        if dataset.n < 2:
            return False, f"Dataset needs at least 2 observations, got {dataset.n}"
        if dataset.p < 1:
            return False, "Dataset has no X_j predictor columns"
        if dataset.x.shape[0] != dataset.n or dataset.v.shape[0] != dataset.n:
            return False, f"Row mismatch: Y has {dataset.n}, X {dataset.x.shape[0]}, V {dataset.v.shape[0]}"
        for name, values in (('Y', dataset.y), ('X', dataset.x), ('V', dataset.v), ('E', dataset.e)):
            if not self._all_finite(values):
                return False, f"Non-finite values in {name}"
        if np.any(dataset.v < 0.0) or np.any(dataset.v > 1.0):
            return False, "Index variable V must lie in [0, 1]"
        return True, ""


# ---------------- RUN CONFIGS ----------------
class RunConfigValidator(BaseValidator):
    """Checks a run configuration against the dataset it will be fitted to."""

    def validate(self, item: Tuple[RunConfig, Dataset]):
        config, dataset = item
        priors = config.priors if config.is_quantile else config.gaussian_priors
        d = config.spline.basis_count
        try:
            priors.sigma_alpha0_matrix(d)
            if dataset.q:
                priors.sigma_beta_matrix(dataset.q)
        except ValueError as e:
            return False, str(e)
        if config.mcmc.chains > 1 and config.mcmc.stored_count < 2:
            return False, "Each chain must store at least 2 draws"
        return True, ""


# ---------------- TRUTH ----------------
class TruthValidator(BaseValidator):
    def validate(self, item: Tuple[Dict[str, Any], Dict[str, Any]]):
        truth, summary = item
        for key in ('curves', 'support'):
            if key not in truth:
                return False, f"Truth file missing '{key}'"
        p = int(truth['curves'].get('p', -1))
        if p != summary.get('p'):
            return False, f"Truth has p={p} but the fit has p={summary.get('p')}"
        if any(not 1 <= j <= p for j in truth['support']):
            return False, f"Support {truth['support']} outside 1..{p}"
        return True, ""
