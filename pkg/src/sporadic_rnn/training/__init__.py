"""Initialization, optimization, training loop, metrics and τ search."""

from sporadic_rnn.training.adam import AdamState, adam_step, clip_gradients
from sporadic_rnn.training.init import hidden_size, init_params
from sporadic_rnn.training.loop import DivergenceError, TrainResult, mean_loss, train
from sporadic_rnn.training.metrics import evaluate, masked_errors, predict_batch
from sporadic_rnn.training.tau_search import (
    TauSearchResult,
    default_tau_candidates,
    fit_at_tau,
    tau_search,
)

__all__ = [
    "AdamState",
    "adam_step",
    "clip_gradients",
    "hidden_size",
    "init_params",
    "DivergenceError",
    "TrainResult",
    "mean_loss",
    "train",
    "evaluate",
    "masked_errors",
    "predict_batch",
    "TauSearchResult",
    "default_tau_candidates",
    "fit_at_tau",
    "tau_search",
]
