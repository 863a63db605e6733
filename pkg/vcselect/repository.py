import json
import logging
import os
import re
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from vcselect.errors import DataValidationError, MissingArtifactError
from vcselect.models import ChainDraws, Dataset, PosteriorSamples
from vcselect.schemas import RunConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
SAMPLES_DIR = 'samples'
INDEX_FILE = 'index.json'


def _require(path: str, what: str):
    if not os.path.exists(path):
        raise MissingArtifactError(f'{what} not found: {path}')


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _to_builtin(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


# JSON documents
def write_json(document: Dict, path: str) -> str:
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=2, sort_keys=True, default=_to_builtin)
        f.write('\n')
    logger.info(f"Wrote {path}")
    return path


def read_json(path: str, what: str = 'JSON file') -> Dict:
    _require(path, what)
    logger.info(f"Reading {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_result(document: Dict, config: RunConfig, path: str) -> str:
    """Write a result document with the full run configuration embedded."""
    return write_json({**document, 'config': config.model_dump(mode='json')}, path)


def read_run_config(document: Dict) -> RunConfig:
    if 'config' not in document:
        raise DataValidationError('result document has no embedded run configuration')
    return RunConfig.model_validate(document['config'])


# Datasets
def dataset_frame(dataset: Dataset) -> pd.DataFrame:
    columns = {'V': dataset.v}
    for k in range(dataset.q):
        columns[f'E_{k + 1}'] = dataset.e[:, k]
    for j in range(1, dataset.p + 1):
        columns[f'X_{j}'] = dataset.x[:, j]
    columns['Y'] = dataset.y
    return pd.DataFrame(columns)


def write_dataset(dataset: Dataset, path: str) -> str:
    _ensure_parent(path)
    logger.info(f"Writing dataset n={dataset.n}, p={dataset.p}, q={dataset.q} to {path}")
    dataset_frame(dataset).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def _indexed_columns(columns: List[str], prefix: str) -> List[str]:
    pattern = re.compile(rf'^{prefix}_(\d+)$')
    found = sorted((int(m.group(1)), c) for c in columns if (m := pattern.match(c)))
    if [k for k, _ in found] != list(range(1, len(found) + 1)):
        raise DataValidationError(f'{prefix}_k columns must be numbered 1..{len(found)}')
    return [c for _, c in found]


def read_dataset(path: str) -> Dataset:
    _require(path, 'dataset')
    df = pd.read_csv(path, float_precision='round_trip')
    for required in ('V', 'Y'):
        if required not in df.columns:
            raise DataValidationError(f'dataset {path} has no {required} column')
    x_columns = _indexed_columns(list(df.columns), 'X')
    e_columns = _indexed_columns(list(df.columns), 'E')
    logger.info(f"Read dataset {path}: {len(df)} rows, p={len(x_columns)}, q={len(e_columns)}")
    return Dataset.from_predictors(
        y=df['Y'].to_numpy(dtype=float),
        x_without_intercept=df[x_columns].to_numpy(dtype=float),
        v=df['V'].to_numpy(dtype=float),
        e=df[e_columns].to_numpy(dtype=float) if e_columns else None,
    )


# Posterior samples
def write_samples(samples: PosteriorSamples, directory: str) -> str:
    """One .npy file per chain and parameter plus an index.json sidecar."""
    root = os.path.join(directory, SAMPLES_DIR)
    index = {**samples.metadata(), 'parameters': {}, 'chains': []}
    for chain in samples.chains:
        chain_dir = os.path.join(root, f'chain_{chain.stream_id}')
        os.makedirs(chain_dir, exist_ok=True)
        files = {}
        for name, draws in chain.draws.items():
            file_name = f'{name}.npy'
            np.save(os.path.join(chain_dir, file_name), draws, allow_pickle=False)
            files[name] = file_name
            index['parameters'][name] = {'shape': list(draws.shape[1:]), 'dtype': str(draws.dtype)}
        index['chains'].append({'stream_id': chain.stream_id, 'draws': chain.size, 'files': files})
    write_json(index, os.path.join(root, INDEX_FILE))
    logger.info(f"Stored {len(samples.chains)} chain(s) of {samples.method} draws under {root}")
    return root


def read_samples(directory: str) -> PosteriorSamples:
    root = os.path.join(directory, SAMPLES_DIR)
    index = read_json(os.path.join(root, INDEX_FILE), 'samples index')
    chains = []
    for entry in index['chains']:
        chain_dir = os.path.join(root, f"chain_{entry['stream_id']}")
        draws = {}
        for name, file_name in entry['files'].items():
            path = os.path.join(chain_dir, file_name)
            _require(path, f'draws of {name}')
            draws[name] = np.load(path, allow_pickle=False)
        chains.append(ChainDraws(stream_id=entry['stream_id'], draws=draws))
    return PosteriorSamples(
        method=index['method'], tau=index['tau'], iterations=index['iterations'],
        burn_in=index['burn_in'], thin=index['thin'], seed=index['seed'],
        degree=index['degree'], interior_knots=index['interior_knots'], chains=chains,
    )


# Curves
def write_frame(frame: pd.DataFrame, path: str) -> str:
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_frame(path: str, what: str = 'table') -> pd.DataFrame:
    _require(path, what)
    return pd.read_csv(path, float_precision='round_trip')


def get_truth(path: Optional[str]) -> Dict:
    if not path:
        raise MissingArtifactError('no truth file given')
    return read_json(path, 'truth file')
