import logging
import os
from typing import Any, Dict, List

import pandas as pd

from vcselect import repository
from vcselect.models import PosteriorSamples
from vcselect.pipeline.extractors import (
    CURVES_FILE,
    DATASET_FILE,
    DIAGNOSTICS_FILE,
    METRICS_FILE,
    SPEC_FILE,
    SUMMARY_FILE,
    TRUTH_FILE,
)
from vcselect.schemas import RunConfig
from vcselect.simulate import SimulatedData

logger = logging.getLogger(__name__)


class ArtifactLoader:
    """Writes every command's outputs through the repository functions"""

    def save_simulation(self, sim: SimulatedData, directory: str) -> Dict[str, str]:
        os.makedirs(directory, exist_ok=True)
        paths = {
            'dataset': repository.write_dataset(sim.dataset, os.path.join(directory, DATASET_FILE)),
            'truth': repository.write_json({
                'spec': sim.spec.model_dump(mode='json'),
                'curves': sim.curves.to_dict(),
                'support': sim.support,
                'beta': sim.beta,
            }, os.path.join(directory, TRUTH_FILE)),
            'spec': repository.write_json(sim.spec.model_dump(mode='json'), os.path.join(directory, SPEC_FILE)),
        }
        logger.info(f"Simulation {sim.spec.label()} seed {sim.spec.seed} saved to {directory}")
        return paths

    def save_fit(self, samples: PosteriorSamples, summary: Dict[str, Any], curves: pd.DataFrame,
                 config: RunConfig, directory: str) -> Dict[str, str]:
        os.makedirs(directory, exist_ok=True)
        paths = {
            'samples': repository.write_samples(samples, directory),
            'curves': repository.write_frame(curves, os.path.join(directory, CURVES_FILE)),
            'summary': repository.write_result(summary, config, os.path.join(directory, SUMMARY_FILE)),
        }
        logger.info(f"Fit outputs saved to {directory}")
        return paths

    def save_metrics(self, metrics: Dict[str, Any], config: RunConfig, directory: str) -> str:
        return repository.write_result(metrics, config, os.path.join(directory, METRICS_FILE))

    def save_diagnostics(self, report: Dict[str, Any], config: RunConfig, directory: str) -> str:
        return repository.write_result(report, config, os.path.join(directory, DIAGNOSTICS_FILE))

    def save_replicate(self, row: Dict[str, Any], curves: pd.DataFrame, directory: str, replicate: int) -> str:
        """Per-replicate record; its presence marks the replicate as completed."""
        repository.write_frame(curves, os.path.join(directory, f'curves_{replicate}.csv'))
        return repository.write_json(row, os.path.join(directory, f'replicate_{replicate}.json'))

    def save_errors(self, errors: List[str], directory: str, name: str) -> str:
        path = os.path.join(directory, f'{name}.errors.json')
        repository.write_json({'errors': errors}, path)
        logger.warning(f"Errors saved to {path}")
        return path

    def save_study_tables(self, fits: pd.DataFrame, aggregate: pd.DataFrame,
                          curves: Dict[str, pd.DataFrame], manifest: Dict[str, Any],
                          directory: str) -> Dict[str, str]:
        paths = {
            'fits': repository.write_frame(fits, os.path.join(directory, 'fits.csv')),
            'aggregate': repository.write_frame(aggregate, os.path.join(directory, 'aggregate.csv')),
        }
        for cell, frame in curves.items():
            paths[f'curves_{cell}'] = repository.write_frame(frame, os.path.join(directory, f'curves_{cell}.csv'))
        paths['manifest'] = repository.write_json(manifest, os.path.join(directory, 'manifest.json'))
        return paths
