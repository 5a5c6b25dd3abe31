"""Sporadic data preparation: CSV I/O, binning, standardization, fills, synthesis."""

from sporadic_rnn.data.binning import BinnedSequence, bin_dataset, bin_series, observed_gaps
from sporadic_rnn.data.csv_io import dataset_frame, read_csv, write_csv
from sporadic_rnn.data.errors import DataError
from sporadic_rnn.data.examples import build_batch, build_examples, make_example
from sporadic_rnn.data.fill import apply_baseline_fill
from sporadic_rnn.data.standardize import Standardizer, fit_standardizer
from sporadic_rnn.data.synthetic import discretize, generate_synthetic, simulate_subject

__all__ = [
    "DataError",
    # Binning
    "BinnedSequence",
    "bin_series",
    "bin_dataset",
    "observed_gaps",
    # Standardization and fills
    "Standardizer",
    "fit_standardizer",
    "apply_baseline_fill",
    # Examples
    "make_example",
    "build_examples",
    "build_batch",
    # Synthetic data
    "discretize",
    "generate_synthetic",
    "simulate_subject",
    # CSV
    "read_csv",
    "write_csv",
    "dataset_frame",
]
