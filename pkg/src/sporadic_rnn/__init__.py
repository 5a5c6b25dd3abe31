"""
Sporadic RNN - continuous-time autoregressive recurrent networks.

This package provides tools for:
- Binning irregular, asynchronous series onto a τ grid with masks and gaps
- CAR-RNN, CAR-LSTM and CAR-GRU cells with exact backpropagation through time
- Univariate CAR(1) imputation of missing inputs
- Adam training with early stopping and τ grid search
- Synthetic data from known CAR(1) processes and gradient verification
"""

__version__ = "0.1.0"

from sporadic_rnn.data import bin_series, generate_synthetic, read_csv, write_csv
from sporadic_rnn.engine import CellParams, forward_sequence, loss_and_gradients
from sporadic_rnn.training import evaluate, train

__all__ = [
    "bin_series",
    "generate_synthetic",
    "read_csv",
    "write_csv",
    "CellParams",
    "forward_sequence",
    "loss_and_gradients",
    "evaluate",
    "train",
]
