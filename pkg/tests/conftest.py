"""Shared test fixtures."""

import numpy as np
import pytest

from sporadic_rnn.data.csv_io import write_csv
from sporadic_rnn.data.synthetic import generate_synthetic
from sporadic_rnn.models import Observation, ProcessSpec, SporadicDataset, SporadicSeries

PROCESS_TEXT = """\
# two coupled features, irregular visits
drift = -1.0 0.3; -0.2 -0.8
bias = 0.5, -0.3
diffusion_chol = 0.2 0; 0.05 0.2
initial_mean = 1.0 -1.0
initial_cov = 1 0; 0 1
arrival_rate = 0.5
missing_prob = 0.3
horizon = 6
n_subjects = 12
seed = 7
feature_names = a, b
"""


def make_series(subject_id: str, rows: list[tuple[float, int, float]], label=None) -> SporadicSeries:
    """Series from (time, feature, value) triples."""
    return SporadicSeries(
        subject_id=subject_id,
        label=label,
        observations=[Observation(time=t, feature=f, value=v) for t, f, v in rows],
    )


def make_dataset(n_subjects: int = 6, n_features: int = 2, seed: int = 0) -> SporadicDataset:
    """Small random sporadic dataset with irregular, asynchronous observations."""
    rng = np.random.default_rng(seed)
    series = []
    for i in range(n_subjects):
        times = np.cumsum(rng.uniform(0.3, 1.5, size=8))
        rows = []
        for t in times:
            observed = rng.random(n_features) < 0.7
            observed[rng.integers(n_features)] = True
            rows.extend(
                (float(t), int(f), float(rng.normal(f, 1.0))) for f in np.flatnonzero(observed)
            )
        series.append(make_series(f"p{i:02d}", rows))
    return SporadicDataset(feature_names=[f"f{j}" for j in range(n_features)], series=series)


@pytest.fixture
def dataset():
    """Six subjects, two features, about 30% missing."""
    return make_dataset()


@pytest.fixture
def process_file(tmp_path):
    """Synthetic-process file in key = value form."""
    path = tmp_path / "process.txt"
    path.write_text(PROCESS_TEXT)
    return path


@pytest.fixture
def process_spec():
    """A stable two-feature process with noise and missing values."""
    return ProcessSpec(
        drift="-1.0 0.3; -0.2 -0.8",
        bias="0.5, -0.3",
        diffusion_chol="0.2 0; 0.05 0.2",
        initial_mean="1.0 -1.0",
        initial_cov="1 0; 0 1",
        arrival_rate=0.5,
        missing_prob=0.3,
        horizon=6,
        n_subjects=12,
        seed=7,
        feature_names="a, b",
    )


@pytest.fixture
def synthetic_csv(tmp_path, process_spec):
    """Long-format CSV of the fixture process."""
    path = tmp_path / "data.csv"
    write_csv(generate_synthetic(process_spec), path)
    return path
