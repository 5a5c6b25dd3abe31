"""Masked prediction error metrics."""

import numpy as np

from sporadic_rnn.engine.batch import SequenceBatch
from sporadic_rnn.engine.bptt import NoSupervisionError, model_inputs
from sporadic_rnn.engine.cells import CellParams, forward_sequence


def predict_batch(p: CellParams, batch: SequenceBatch) -> np.ndarray:
    """One-step-ahead predictions, B×K×Q."""
    x, _, _ = model_inputs(p, batch)
    y, _ = forward_sequence(p, x, batch.delta_t)
    return y


def masked_errors(y: np.ndarray, s: np.ndarray, mask: np.ndarray) -> dict:
    """MAE and MSE over available cells only."""
    avail = mask > 0
    n = int(avail.sum())
    if n == 0:
        raise NoSupervisionError("no supervision: every target is missing")
    resid = (y - s)[avail]
    return {
        "mae": float(np.mean(np.abs(resid))),
        "mse": float(np.mean(resid * resid)),
        "n_targets": n,
    }


def evaluate(p: CellParams, batch: SequenceBatch) -> dict:
    """MAE/MSE of one-step-ahead predictions in standardized units."""
    return masked_errors(predict_batch(p, batch), batch.targets, batch.target_mask)
