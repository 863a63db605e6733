import os

import numpy as np
import pytest

from vcselect import repository
from vcselect.errors import DataValidationError, MissingArtifactError
from vcselect.models import ChainDraws, Dataset, PosteriorSamples
from vcselect.schemas import RunConfig


def test_dataset_round_trip_is_exact(tmp_path, clinical_dataset):
    path = repository.write_dataset(clinical_dataset, str(tmp_path / 'data.csv'))
    loaded = repository.read_dataset(path)
    np.testing.assert_array_equal(loaded.y, clinical_dataset.y)
    np.testing.assert_array_equal(loaded.x, clinical_dataset.x)
    np.testing.assert_array_equal(loaded.e, clinical_dataset.e)
    np.testing.assert_array_equal(loaded.v, clinical_dataset.v)


def test_dataset_rewrite_is_byte_identical(tmp_path, small_simulation):
    first = repository.write_dataset(small_simulation.dataset, str(tmp_path / 'a.csv'))
    second = repository.write_dataset(repository.read_dataset(first), str(tmp_path / 'b.csv'))
    with open(first, 'rb') as a, open(second, 'rb') as b:
        assert a.read() == b.read()


def test_dataset_columns(tmp_path, small_simulation):
    frame = repository.dataset_frame(small_simulation.dataset)
    assert list(frame.columns) == ['V', 'X_1', 'X_2', 'X_3', 'X_4', 'X_5', 'Y']
    assert len(frame) == 60


def test_dataset_without_predictors(tmp_path):
    dataset = Dataset.from_predictors(np.arange(4.0), np.zeros((4, 0)), np.linspace(0, 1, 4))
    loaded = repository.read_dataset(repository.write_dataset(dataset, str(tmp_path / 'd.csv')))
    assert loaded.p == 0 and loaded.q == 0


def test_read_dataset_validates_columns(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('V,X_1,X_3,Y\n0.1,1,2,3\n')
    with pytest.raises(DataValidationError):
        repository.read_dataset(str(path))
    path.write_text('V,X_1\n0.1,1\n')
    with pytest.raises(DataValidationError):
        repository.read_dataset(str(path))


def test_missing_files_raise(tmp_path):
    with pytest.raises(MissingArtifactError):
        repository.read_dataset(str(tmp_path / 'absent.csv'))
    with pytest.raises(MissingArtifactError):
        repository.read_samples(str(tmp_path))
    with pytest.raises(MissingArtifactError):
        repository.get_truth(None)


def test_samples_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    chains = [
        ChainDraws(k, {'alpha': rng.standard_normal((5, 3, 2)), 'theta': rng.uniform(size=5),
                       'inclusion': rng.uniform(size=(5, 2)) < 0.5, 'beta': np.zeros((5, 0))})
        for k in range(2)
    ]
    samples = PosteriorSamples(method='bqrvcss', tau=0.25, iterations=15, burn_in=10, thin=1, seed=9,
                               degree=1, interior_knots=0, chains=chains)
    repository.write_samples(samples, str(tmp_path))
    assert os.path.exists(tmp_path / 'samples' / 'chain_1' / 'alpha.npy')

    loaded = repository.read_samples(str(tmp_path))
    assert loaded.metadata() == samples.metadata()
    for name in samples.parameter_names:
        np.testing.assert_array_equal(loaded.pooled(name), samples.pooled(name))
    assert loaded.pooled('inclusion').dtype == bool


def test_result_embeds_run_config(tmp_path):
    config = RunConfig(method='bvc', tau=0.7)
    path = repository.write_result({'selected': np.array([1, 3]), 'timse': np.float64(0.5)}, config,
                                   str(tmp_path / 'out' / 'summary.json'))
    document = repository.read_json(path)
    assert document['selected'] == [1, 3]
    assert repository.read_run_config(document) == config
    with pytest.raises(DataValidationError):
        repository.read_run_config({'selected': []})
