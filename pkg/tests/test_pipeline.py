import logging
import os

import numpy as np
import pandas as pd
import pytest

from vcselect import repository
from vcselect.errors import ConfigurationError, DataValidationError
from vcselect.inference import CurveEstimate
from vcselect.models import Dataset
from vcselect.pipeline import ArtifactExtractor, FitOrchestrator, FitTransformer, StudyOrchestrator
from vcselect.pipeline.extractors import merge_overrides
from vcselect.pipeline.orchestrator import replicate_config, study_cells
from vcselect.pipeline.transformers import curves_frame, curves_from_frame, mean_curve_frame
from vcselect.pipeline.validators import DatasetValidator, RunConfigValidator, TruthValidator
from vcselect.schemas import McmcOptions, RunConfig, ScenarioSpec, SplineConfig, StudyGrid

TINY_MCMC = McmcOptions(iterations=30, burn_in=10, thin=1, chains=1, seed=1)
LINEAR = SplineConfig(degree=1, interior_knots=0)


def tiny_grid(tmp_path, **overrides):
    settings = dict(
        scenarios=[ScenarioSpec(n=30, p=3)], methods=['bqrvcss'], taus=[0.5], splines=[LINEAR],
        replicates=2, base_seed=100, mcmc=TINY_MCMC, grid_size=10, output_dir=str(tmp_path / 'study'),
    )
    settings.update(overrides)
    return StudyGrid(**settings)


def test_merge_overrides_keeps_document_values_for_missing_flags():
    document = {'method': 'bvc', 'mcmc': {'iterations': 100, 'burn_in': 50}}
    merged = merge_overrides(document, {'method': None, 'tau': 0.3, 'mcmc': {'iterations': 200, 'thin': None}})
    assert merged == {'method': 'bvc', 'tau': 0.3, 'mcmc': {'iterations': 200, 'burn_in': 50}}
    assert document['mcmc']['iterations'] == 100


def test_invalid_run_config_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        ArtifactExtractor().load_run_config(None, {'mcmc': {'iterations': 10, 'burn_in': 10}})
    with pytest.raises(ConfigurationError):
        ArtifactExtractor().load_study_grid(None, {'taus': [1.5]})


def test_dataset_validator():
    validator = DatasetValidator()
    good = Dataset.from_predictors(np.zeros(3), np.ones((3, 1)), [0.0, 0.5, 1.0])
    assert validator.validate(good) == (True, "")
    ok, err = validator.validate(Dataset.from_predictors(np.zeros(3), np.ones((3, 1)), [0.0, 0.5, 1.5]))
    assert not ok and 'V' in err
    ok, err = validator.validate(Dataset.from_predictors([0.0, np.nan, 1.0], np.ones((3, 1)), [0.0, 0.5, 1.0]))
    assert not ok and 'Y' in err


def test_run_config_validator_checks_prior_shapes(clinical_dataset):
    config = RunConfig(priors={'sigma_beta': [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]})
    ok, err = RunConfigValidator().validate((config, clinical_dataset))
    assert not ok and 'sigma_beta' in err
    assert RunConfigValidator().validate((RunConfig(), clinical_dataset))[0]


def test_truth_validator():
    truth = {'curves': {'p': 5, 'hard_intercept': False}, 'support': [1, 2, 3]}
    assert TruthValidator().validate((truth, {'p': 5}))[0]
    assert not TruthValidator().validate((truth, {'p': 4}))[0]
    assert not TruthValidator().validate(({'curves': {'p': 5}}, {'p': 5}))[0]


def test_curve_table_round_trip():
    grid = np.linspace(0, 1, 4)
    estimates = [CurveEstimate(grid, grid * j, grid * j - 1, grid * j + 1) for j in range(3)]
    frame = curves_frame(estimates)
    assert list(frame.columns) == ['j', 'v', 'median', 'lower', 'upper']
    assert len(frame) == 12
    parsed = curves_from_frame(frame)
    np.testing.assert_array_equal(parsed[2].median, 2 * grid)
    averaged = mean_curve_frame([frame, frame.assign(median=frame['median'] + 2.0)])
    np.testing.assert_allclose(averaged['median'], frame['median'] + 1.0)
    with pytest.raises(DataValidationError):
        curves_from_frame(frame.drop(columns=['upper']))


def test_summary_of_a_slab_only_fit_uses_credible_intervals(small_simulation):
    config = RunConfig(method='bqrvc', spline=LINEAR, mcmc=TINY_MCMC, grid_size=10)
    result = FitOrchestrator().fit(small_simulation.dataset, config, max_workers=1)
    assert result.summary['selection_rule'] == 'credible_interval'
    assert 'inclusion_probabilities' not in result.summary
    assert result.summary['ci_level'] == 0.95
    assert len(result.curves) == 10 * (small_simulation.dataset.p + 1)


def test_summary_of_a_spike_fit_uses_the_median_probability_model(small_simulation):
    config = RunConfig(method='bvcss', spline=LINEAR, mcmc=TINY_MCMC.model_copy(update={'chains': 2}))
    result = FitOrchestrator().fit(small_simulation.dataset, config, max_workers=1)
    summary = result.summary
    assert summary['selection_rule'] == 'median_probability_model'
    assert summary['stream_ids'] == [0, 1]
    probs = np.asarray(summary['inclusion_probabilities'])
    assert summary['selected'] == [j + 1 for j in np.nonzero(probs >= 0.5)[0]]
    assert set(summary['scalars']) >= {'sigma_sq', 'lambda_sq', 'pi0'}


def test_evaluate_matches_truth_from_curves_alone(small_simulation):
    config = RunConfig(spline=LINEAR, mcmc=TINY_MCMC, grid_size=10)
    transformer = FitTransformer()
    result = FitOrchestrator().fit(small_simulation.dataset, config, max_workers=1)
    truth = {'curves': small_simulation.curves.to_dict(), 'support': small_simulation.support}
    metrics = transformer.evaluate(result.summary, result.curves, truth)
    expected = 0.0
    for j, group in result.curves.groupby('j'):
        target = small_simulation.curves.gamma(int(j), group['v'].to_numpy())
        expected += np.mean((group['median'].to_numpy() - target) ** 2)
    assert metrics['timse'] == pytest.approx(expected)
    assert metrics['fit_class'] in {'C', 'O', 'U'}
    with pytest.raises(DataValidationError):
        transformer.evaluate({**result.summary, 'p': 4}, result.curves, truth)


def test_study_cells_skip_redundant_pi0_priors():
    grid = StudyGrid(methods=['bqrvcss', 'bvc'], taus=[0.25, 0.5], pi0_priors=[(1.0, 1.0), (1.0, 9.0)])
    cells = study_cells(grid)
    assert len(cells) == 2 * 2 + 2
    assert len({c.label for c in cells}) == len(cells)
    assert {c.pi0_prior for c in cells if c.method == 'bvc'} == {(1.0, 1.0)}


def test_replicate_config_applies_the_pi0_prior():
    grid = StudyGrid(methods=['bvcss'], pi0_priors=[(2.0, 5.0)])
    cell = study_cells(grid)[0]
    config = replicate_config(grid, cell, 123)
    assert (config.priors.e, config.priors.f) == (2.0, 5.0)
    assert (config.gaussian_priors.a, config.gaussian_priors.b) == (2.0, 5.0)
    assert config.mcmc.seed == 123
    assert not config.store_latents


def test_replicate_study_writes_rows_aggregate_and_resumes(tmp_path):
    grid = tiny_grid(tmp_path)
    report = StudyOrchestrator(grid).run()
    out = tmp_path / 'study'
    [(label, stats)] = report.items()
    assert stats == {'total': 2, 'resumed': 0, 'created': 2, 'errors': []}

    fits = pd.read_csv(out / 'fits.csv')
    aggregate = pd.read_csv(out / 'aggregate.csv')
    assert len(fits) == 2 and len(aggregate) == 1
    assert list(fits['seed']) == [100, 101]
    assert aggregate.loc[0, 'replicates'] == 2
    assert aggregate.loc[0, 'C'] + aggregate.loc[0, 'O'] + aggregate.loc[0, 'U'] == pytest.approx(1.0)
    assert os.path.exists(out / f'curves_{label}.csv')
    manifest = repository.read_json(str(out / 'manifest.json'))
    assert manifest['completed'] == {label: [0, 1]}

    rerun = StudyOrchestrator(grid).run()
    assert rerun[label]['resumed'] == 2 and rerun[label]['created'] == 0
    pd.testing.assert_frame_equal(pd.read_csv(out / 'fits.csv'), fits)


def test_interrupted_study_resumes_missing_replicates(tmp_path):
    grid = tiny_grid(tmp_path)
    StudyOrchestrator(grid).run()
    cell_dir = tmp_path / 'study' / 'replicates' / study_cells(grid)[0].label
    first = repository.read_json(str(cell_dir / 'replicate_1.json'))
    os.remove(cell_dir / 'replicate_1.json')

    report = StudyOrchestrator(grid).run()
    stats = next(iter(report.values()))
    assert (stats['resumed'], stats['created']) == (1, 1)
    assert repository.read_json(str(cell_dir / 'replicate_1.json'))['timse'] == pytest.approx(first['timse'])


def test_replicate_failures_are_recorded(tmp_path):
    # sigma_alpha0 of the wrong size fails inside every replicate
    grid = tiny_grid(tmp_path, replicates=1, priors={'sigma_alpha0': [[1.0]]})
    report = StudyOrchestrator(grid).run()
    stats = next(iter(report.values()))
    assert stats['created'] == 0 and len(stats['errors']) == 1
    label = next(iter(report))
    assert os.path.exists(tmp_path / 'study' / 'errors' / f'{label}.errors.json')


def test_study_cell_labels_distinguish_every_scenario_setting():
    scenarios = [
        ScenarioSpec(error_kind='normal_mixture', mixture_scale='variance'),
        ScenarioSpec(error_kind='normal_mixture', mixture_scale='sd'),
        ScenarioSpec(ar_rho=0.2),
        ScenarioSpec(clinical_covariates=2),
        ScenarioSpec(),
    ]
    labels = [cell.label for cell in study_cells(StudyGrid(scenarios=scenarios))]
    assert len(labels) == 5
    assert len(set(labels)) == 5


def test_multi_chain_replicates_record_convergence(tmp_path):
    grid = tiny_grid(tmp_path, mcmc=TINY_MCMC.model_copy(update={'chains': 2}))
    StudyOrchestrator(grid).run()
    fits = pd.read_csv(tmp_path / 'study' / 'fits.csv')
    assert {'max_psrf', 'converged'} <= set(fits.columns)
    assert np.all(fits['max_psrf'] > 0)
    aggregate = pd.read_csv(tmp_path / 'study' / 'aggregate.csv')
    assert aggregate.loc[0, 'converged'] == pytest.approx(fits['converged'].astype(bool).mean())


def test_single_chain_replicates_have_no_convergence_columns(tmp_path):
    StudyOrchestrator(tiny_grid(tmp_path, replicates=1)).run()
    assert 'converged' not in pd.read_csv(tmp_path / 'study' / 'fits.csv').columns


def test_fit_warns_outside_the_recommended_knot_range(small_simulation, caplog):
    caplog.set_level(logging.WARNING, logger='vcselect.pipeline.orchestrator')
    # n=60, degree 1: recommended interior knots 1..3
    FitOrchestrator().fit(small_simulation.dataset, RunConfig(spline=LINEAR, mcmc=TINY_MCMC, grid_size=10), 1)
    assert 'outside the recommended range 1..3' in caplog.text

    caplog.clear()
    inside = SplineConfig(degree=1, interior_knots=2)
    FitOrchestrator().fit(small_simulation.dataset, RunConfig(spline=inside, mcmc=TINY_MCMC, grid_size=10), 1)
    assert 'recommended range' not in caplog.text
