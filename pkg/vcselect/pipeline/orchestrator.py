import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from config.study_config import study_config
from vcselect import repository
from vcselect.basis import recommended_knot_range
from vcselect.diagnostics import diagnose
from vcselect.environment import output_dir as resolve_output_dir
from vcselect.errors import ConfigurationError, DataValidationError
from vcselect.metrics import aggregate_replicates, imse_percentile_replicates
from vcselect.models import Dataset, PosteriorSamples
from vcselect.pipeline.extractors import ArtifactExtractor
from vcselect.pipeline.loaders import ArtifactLoader
from vcselect.pipeline.transformers import FitTransformer, curve_subset, mean_curve_frame, stack_rows
from vcselect.pipeline.validators import DatasetValidator, RunConfigValidator, TruthValidator
from vcselect.samplers import fit_posterior
from vcselect.schemas import SPIKE_METHODS, RunConfig, ScenarioSpec, SplineConfig, StudyGrid
from vcselect.simulate import simulate_dataset

logger = logging.getLogger(__name__)


@dataclass
class FitResult:
    samples: PosteriorSamples
    summary: Dict[str, Any]
    curves: pd.DataFrame


class FitOrchestrator:
    """fit -> evaluate -> diagnose for a single dataset."""

    def __init__(self):
        self.extractor = ArtifactExtractor()
        self.transformer = FitTransformer()
        self.loader = ArtifactLoader()
        self.validators = {
            'dataset': DatasetValidator(),
            'config': RunConfigValidator(),
            'truth': TruthValidator(),
        }

    def fit(self, dataset: Dataset, config: RunConfig, max_workers: Optional[int] = None) -> FitResult:
        ok, err = self.validators['dataset'].validate(dataset)
        if not ok:
            raise DataValidationError(err)
        ok, err = self.validators['config'].validate((config, dataset))
        if not ok:
            raise ConfigurationError(err)
        low, high = recommended_knot_range(dataset.n, config.spline.degree)
        if not low <= config.spline.interior_knots <= high:
            logger.warning(
                f"{config.spline.interior_knots} interior knots is outside the recommended range "
                f"{low}..{high} for n={dataset.n}, degree {config.spline.degree}"
            )
        started = time.perf_counter()
        samples = fit_posterior(dataset, config, max_workers)
        wall_clock = time.perf_counter() - started
        summary, curves = self.transformer.summarize(samples, dataset, config, wall_clock)
        return FitResult(samples=samples, summary=summary, curves=curves)

    def run_fit(self, config: RunConfig, directory: str, max_workers: Optional[int] = None) -> Dict[str, str]:
        dataset = self.extractor.extract_dataset(config.data_path)
        logger.info(f"Fitting {config.method} to {config.data_path} with {config.mcmc.chains} chain(s)")
        result = self.fit(dataset, config, max_workers)
        return self.loader.save_fit(result.samples, result.summary, result.curves, config, directory)

    def evaluate(self, fit_dir: str, truth_path: Optional[str] = None) -> Dict[str, Any]:
        fit = self.extractor.extract_fit(fit_dir)
        truth = self.extractor.extract_truth(truth_path, fit)
        ok, err = self.validators['truth'].validate((truth, fit.summary))
        if not ok:
            raise DataValidationError(err)
        metrics = self.transformer.evaluate(fit.summary, fit.curves, truth)
        self.loader.save_metrics(metrics, fit.config, fit_dir)
        return metrics

    def evaluate_batch(self, fit_dirs: List[str], truth_paths: List[Optional[str]]) -> Dict[str, Any]:
        """Metrics for every fit plus one aggregate over all of them."""
        rows = []
        for r, (fit_dir, truth_path) in enumerate(zip(fit_dirs, truth_paths)):
            metrics = self.evaluate(fit_dir, truth_path)
            row = {'fit_dir': fit_dir, 'replicate': r, 'fit_class': metrics['fit_class'], 'timse': metrics['timse']}
            row.update({f'coverage_{j}': v for j, v in metrics['coverage'].items()})
            rows.append(row)
        frame = pd.DataFrame(rows)
        return {'fits': rows, 'aggregate': aggregate_replicates(frame)}

    def diagnose(self, fit_dir: str, split: bool = False,
                 checkpoint_step: int = study_config.PSRF_CHECKPOINT_STEP, track_all: Optional[bool] = None,
                 cutoff: float = study_config.PSRF_CUTOFF) -> Dict[str, Any]:
        fit = self.extractor.extract_fit(fit_dir)
        samples = self.extractor.extract_samples(fit_dir)
        track_all = fit.config.track_all_coefficients if track_all is None else track_all
        report = diagnose(samples, fit.summary['selected'], split=split, checkpoint_step=checkpoint_step,
                          track_all=track_all, cutoff=cutoff)
        document = report.as_dict()
        self.loader.save_diagnostics(document, fit.config, fit_dir)
        return document


@dataclass
class StudyCell:
    scenario: ScenarioSpec
    method: str
    tau: float
    spline: SplineConfig
    pi0_prior: Tuple[float, float]

    @property
    def label(self) -> str:
        e, f = self.pi0_prior
        s = self.scenario
        return (f"{s.label()}_n{s.n}_p{s.p}_rho{s.ar_rho:g}_mix-{s.mixture_scale}_q{s.clinical_covariates}"
                f"_{self.method}_tau{self.tau:g}_{self.spline.label()}_pi0-{e:g}-{f:g}")

    def as_row(self) -> Dict[str, Any]:
        return {
            'cell': self.label,
            'scenario': self.scenario.label(),
            'ar_rho': self.scenario.ar_rho,
            'mixture_scale': self.scenario.mixture_scale,
            'clinical_covariates': self.scenario.clinical_covariates,
            'method': self.method,
            'method_label': study_config.METHOD_LABELS[self.method],
            'tau': self.tau,
            'degree': self.spline.degree,
            'interior_knots': self.spline.interior_knots,
            'pi0_e': self.pi0_prior[0],
            'pi0_f': self.pi0_prior[1],
        }


def study_cells(grid: StudyGrid) -> List[StudyCell]:
    cells = []
    for scenario in grid.scenarios:
        for method in grid.methods:
            # the pi0 prior only matters for spike-and-slab samplers
            pi0_priors = grid.pi0_priors if method in SPIKE_METHODS else grid.pi0_priors[:1]
            for tau in grid.taus:
                for spline in grid.splines:
                    for prior in pi0_priors:
                        cells.append(StudyCell(scenario, method, tau, spline, tuple(prior)))
    return cells


def replicate_config(grid: StudyGrid, cell: StudyCell, seed: int) -> RunConfig:
    e, f = cell.pi0_prior
    return RunConfig(
        method=cell.method,
        tau=cell.tau,
        spline=cell.spline,
        priors=grid.priors.model_copy(update={'e': e, 'f': f}),
        gaussian_priors=grid.gaussian_priors.model_copy(update={'a': e, 'b': f}),
        mcmc=grid.mcmc.model_copy(update={'seed': seed}),
        grid_size=grid.grid_size,
        store_latents=False,
    )


def run_replicate(grid: StudyGrid, cell: StudyCell, replicate: int, directory: str,
                  max_workers: Optional[int] = None) -> Dict[str, Any]:
    """Simulate, fit and evaluate replicate r; data and chains draw from separate streams of seed base_seed + r."""
    seed = grid.base_seed + replicate
    spec = cell.scenario.model_copy(update={'tau': cell.tau, 'seed': seed})
    sim = simulate_dataset(spec)
    config = replicate_config(grid, cell, seed)
    orchestrator = FitOrchestrator()
    result = orchestrator.fit(sim.dataset, config, max_workers)
    truth = {'curves': sim.curves.to_dict(), 'support': sim.support}
    metrics = orchestrator.transformer.evaluate(result.summary, result.curves, truth)
    report = None
    if len(result.samples.chains) >= 2:
        report = diagnose(result.samples, result.summary['selected'],
                          checkpoint_step=result.samples.stored_count, cutoff=grid.psrf_cutoff)
    row = orchestrator.transformer.fit_row(cell.as_row(), replicate, seed, metrics, result.summary, report)
    orchestrator.loader.save_replicate(row, curve_subset(result.curves), directory, replicate)
    return row


class StudyOrchestrator:
    """Scenario x method x tau x spline x pi0-prior grid with resumable replicates."""

    def __init__(self, grid: StudyGrid, output_dir: Optional[str] = None, max_workers: Optional[int] = None):
        self.grid = grid
        self.output_dir = resolve_output_dir(output_dir or grid.output_dir)
        self.max_workers = max_workers
        self.extractor = ArtifactExtractor()
        self.loader = ArtifactLoader()

    def cell_dir(self, cell: StudyCell) -> str:
        return os.path.join(self.output_dir, 'replicates', cell.label)

    def completed(self, cell: StudyCell) -> Dict[int, Dict[str, Any]]:
        rows = {}
        for path in self.extractor.list_replicate_rows(self.cell_dir(cell)):
            row = repository.read_json(path, 'replicate record')
            rows[int(row['replicate'])] = row
        return rows

    def process_cell(self, cell: StudyCell) -> Dict[str, Any]:
        done = self.completed(cell)
        pending = [r for r in range(self.grid.replicates) if r not in done]
        logger.info(f"Cell {cell.label}: {len(done)} replicates done, {len(pending)} pending")
        stats = {'total': self.grid.replicates, 'resumed': len(done), 'created': 0, 'errors': []}
        directory = self.cell_dir(cell)

        if self.max_workers and self.max_workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=self.max_workers) as pool:
                futures = {r: pool.submit(run_replicate, self.grid, cell, r, directory, 1) for r in pending}
                for r, future in futures.items():
                    try:
                        future.result()
                        stats['created'] += 1
                    except Exception as e:
                        logger.exception(f"Replicate {r} of {cell.label} failed")
                        stats['errors'].append(f"replicate {r}: {e}")
        else:
            for r in pending:
                try:
                    run_replicate(self.grid, cell, r, directory)
                    stats['created'] += 1
                except Exception as e:
                    logger.exception(f"Replicate {r} of {cell.label} failed")
                    stats['errors'].append(f"replicate {r}: {e}")

        if stats['errors']:
            self.loader.save_errors(stats['errors'], os.path.join(self.output_dir, 'errors'), cell.label)
        return stats

    def summarize_cell(self, cell: StudyCell, rows: Dict[int, Dict[str, Any]]):
        fits = pd.DataFrame([rows[r] for r in sorted(rows)])
        aggregate = {**cell.as_row(), **aggregate_replicates(fits)}
        aggregate['percentile_replicates'] = ' '.join(
            str(int(fits['replicate'].iloc[i])) for i in imse_percentile_replicates(fits['timse'])
        )
        directory = self.cell_dir(cell)
        frames = [repository.read_frame(os.path.join(directory, f'curves_{r}.csv')) for r in sorted(rows)]
        return aggregate, mean_curve_frame(frames)

    def run(self) -> Dict[str, Any]:
        cells = study_cells(self.grid)
        logger.info(f"Study with {len(cells)} cells x {self.grid.replicates} replicates into {self.output_dir}")
        report, all_rows, aggregates, curves, completed = {}, [], [], {}, {}
        for cell in cells:
            report[cell.label] = self.process_cell(cell)
            rows = self.completed(cell)
            completed[cell.label] = sorted(rows)
            if not rows:
                continue
            all_rows.extend(rows[r] for r in sorted(rows))
            aggregate, curve_frame = self.summarize_cell(cell, rows)
            aggregates.append(aggregate)
            curves[cell.label] = curve_frame

        manifest = {
            'grid': self.grid.model_dump(mode='json'),
            'completed': completed,
            'failed': {label: len(stats['errors']) for label, stats in report.items()},
        }
        self.loader.save_study_tables(stack_rows(all_rows), pd.DataFrame(aggregates), curves, manifest,
                                      self.output_dir)
        return report
