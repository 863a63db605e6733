import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from vcselect import repository
from vcselect.errors import ConfigurationError, MissingArtifactError
from vcselect.models import Dataset, PosteriorSamples
from vcselect.schemas import RunConfig, ScenarioSpec, StudyGrid

logger = logging.getLogger(__name__)

SUMMARY_FILE = 'summary.json'
CURVES_FILE = 'curves.csv'
DATASET_FILE = 'dataset.csv'
TRUTH_FILE = 'truth.json'
SPEC_FILE = 'spec.json'
METRICS_FILE = 'metrics.json'
DIAGNOSTICS_FILE = 'diagnostics.json'


@dataclass
class FitArtifacts:
    directory: str
    summary: Dict[str, Any]
    curves: pd.DataFrame
    config: RunConfig


def _validated(model, document: Dict, what: str):
    try:
        return model.model_validate(document)
    except ValidationError as e:
        raise ConfigurationError(f'invalid {what}: {e}')


def merge_overrides(document: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Nested merge of flag values over a config document; None leaves the document value in place."""
    merged = dict(document)
    for key, value in overrides.items():
        if isinstance(value, dict):
            merged[key] = merge_overrides(merged.get(key) or {}, value)
        elif value is not None:
            merged[key] = value
    return merged


class ArtifactExtractor:
    """Reads configuration files and the artifacts written by earlier commands"""

    def load_run_config(self, path: Optional[str] = None, overrides: Dict[str, Any] = None) -> RunConfig:
        document = repository.read_json(path, 'run configuration') if path else {}
        return _validated(RunConfig, merge_overrides(document, overrides or {}), 'run configuration')

    def load_scenario(self, path: Optional[str] = None, overrides: Dict[str, Any] = None) -> ScenarioSpec:
        document = repository.read_json(path, 'scenario') if path else {}
        return _validated(ScenarioSpec, merge_overrides(document, overrides or {}), 'scenario')

    def load_study_grid(self, path: Optional[str] = None, overrides: Dict[str, Any] = None) -> StudyGrid:
        document = repository.read_json(path, 'study grid') if path else {}
        return _validated(StudyGrid, merge_overrides(document, overrides or {}), 'study grid')

    def extract_dataset(self, path: Optional[str]) -> Dataset:
        if not path:
            raise ConfigurationError('no dataset path given')
        return repository.read_dataset(path)

    def extract_fit(self, directory: str) -> FitArtifacts:
        summary = repository.read_json(os.path.join(directory, SUMMARY_FILE), 'fit summary')
        curves = repository.read_frame(os.path.join(directory, CURVES_FILE), 'curve table')
        logger.info(f"Extracted fit from {directory}: method {summary.get('method')}, {len(curves)} curve rows")
        return FitArtifacts(directory=directory, summary=summary, curves=curves,
                            config=repository.read_run_config(summary))

    def extract_samples(self, directory: str) -> PosteriorSamples:
        return repository.read_samples(directory)

    def extract_truth(self, path: Optional[str], fit: Optional[FitArtifacts] = None) -> Dict[str, Any]:
        """Truth from an explicit path, else from the truth_path recorded in the fit's config."""
        path = path or (fit.config.truth_path if fit else None)
        if not path:
            raise MissingArtifactError('no truth file given and none recorded with the fit')
        return repository.get_truth(path)

    def list_replicate_rows(self, directory: str) -> List[str]:
        if not os.path.isdir(directory):
            return []
        return sorted(
            os.path.join(directory, name) for name in os.listdir(directory)
            if name.startswith('replicate_') and name.endswith('.json')
        )
