"""Mini-batch training with early stopping on validation loss."""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from sporadic_rnn.engine.batch import SequenceBatch
from sporadic_rnn.engine.bptt import loss_and_gradients, sequence_loss
from sporadic_rnn.engine.cells import CellParams
from sporadic_rnn.engine.numerics import NonFiniteError
from sporadic_rnn.models.config import TrainConfig
from sporadic_rnn.training.adam import AdamState, adam_step

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or state."""

    def __init__(self, epoch: int, detail: str):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}: {detail}")


@dataclass
class TrainResult:
    params: CellParams
    history: pd.DataFrame
    best_epoch: int
    best_val_loss: float
    stopped_early: bool


def mean_loss(p: CellParams, batch: SequenceBatch) -> float:
    """Masked loss averaged over the sequences of a batch."""
    return float(sequence_loss(p, batch)) / len(batch)


def batch_size(cfg: TrainConfig, n: int) -> int:
    return max(1, round(cfg.batch_fraction * n))


def run_epoch(
    p: CellParams,
    state: AdamState,
    data: SequenceBatch,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> tuple[CellParams, AdamState, float]:
    """One pass over shuffled mini-batches; returns the mean per-sequence loss."""
    order = rng.permutation(len(data))
    size = batch_size(cfg, len(data))
    total = 0.0
    for start in range(0, len(order), size):
        sub = data.select(order[start : start + size])
        loss, grads = loss_and_gradients(p, sub)
        if not math.isfinite(loss):
            raise NonFiniteError("training loss")
        p, state = adam_step(p, grads.scaled(1.0 / len(sub)), state, cfg)
        total += loss
    return p, state, total / len(data)


def train(
    p: CellParams,
    train_data: SequenceBatch,
    val_data: SequenceBatch | None,
    cfg: TrainConfig,
) -> TrainResult:
    """Adam epochs until max_epochs or `patience` epochs without a better val loss.

    Returns the parameters of the best validation epoch. Without validation data
    the training loss drives early stopping.
    """
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.zeros_like(p)
    best, best_loss, best_epoch, wait = p.copy(), math.inf, 0, 0
    rows = []
    stopped = False
    log.info(
        f"Training {p.cell.value} (M={p.n_hidden}, tau={p.tau:.4g}) on {len(train_data)} "
        f"sequences, batch size {batch_size(cfg, len(train_data))}"
    )
    for epoch in range(1, cfg.max_epochs + 1):
        try:
            p, state, train_loss = run_epoch(p, state, train_data, cfg, rng)
            val_loss = mean_loss(p, val_data) if val_data is not None else train_loss
        except NonFiniteError as e:
            raise DivergenceError(epoch, str(e)) from e
        if not math.isfinite(val_loss):
            raise DivergenceError(epoch, "non-finite validation loss")
        rows.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss})
        log.debug(f"epoch {epoch}: train_loss={train_loss:.6g} val_loss={val_loss:.6g}")

        if val_loss < best_loss:
            best, best_loss, best_epoch, wait = p.copy(), val_loss, epoch, 0
        else:
            wait += 1
            if wait >= cfg.patience:
                log.info(f"Early stop at epoch {epoch}; best epoch {best_epoch}")
                stopped = True
                break

    history = pd.DataFrame(rows, columns=["epoch", "train_loss", "val_loss"])
    log.info(f"Best validation loss {best_loss:.6g} at epoch {best_epoch}")
    return TrainResult(best, history, best_epoch, best_loss, stopped)
