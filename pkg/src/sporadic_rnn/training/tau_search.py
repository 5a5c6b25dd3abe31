"""Grid search over the bin width / CAR time step τ."""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from sporadic_rnn.data.binning import observed_gaps
from sporadic_rnn.data.examples import build_batch
from sporadic_rnn.engine.car import tau_in_range
from sporadic_rnn.models.config import TrainConfig
from sporadic_rnn.models.series import SporadicDataset
from sporadic_rnn.training.init import init_params
from sporadic_rnn.training.loop import TrainResult, train
from sporadic_rnn.training.metrics import evaluate

log = logging.getLogger(__name__)


def default_tau_candidates(data: SporadicDataset) -> list[float]:
    """IQR and mean of the within-subject gaps between distinct timestamps."""
    gaps = observed_gaps(data.series)
    q1, q3 = np.percentile(gaps, [25, 75])
    candidates = {float(q3 - q1), float(np.mean(gaps))}
    return sorted(c for c in candidates if c > 0)


@dataclass
class TauSearchResult:
    best_tau: float
    curve: pd.DataFrame
    result: TrainResult


def fit_at_tau(
    train_data: SporadicDataset,
    val_data: SporadicDataset | None,
    tau: float,
    cfg: TrainConfig,
) -> TrainResult:
    """Bin at τ, initialize from the run seed and train."""
    train_batch = build_batch(train_data, tau, cfg.fill)
    val_batch = build_batch(val_data, tau, cfg.fill) if val_data is not None else None
    tau_in_range(tau, train_batch.delta_t[train_batch.target_mask.any(axis=-1)])
    rng = np.random.default_rng(cfg.seed)
    params = init_params(
        cfg,
        n_inputs=train_batch.inputs.shape[-1],
        n_outputs=train_data.n_features,
        tau=tau,
        rng=rng,
    )
    return train(params, train_batch, val_batch, cfg)


def tau_search(
    train_data: SporadicDataset,
    val_data: SporadicDataset,
    candidates: list[float],
    cfg: TrainConfig,
) -> TauSearchResult:
    """Train one model per τ and keep the one with the lowest validation MSE.

    Candidates are in the (normalized) time units of the data. Ties go to the
    smaller τ.
    """
    if not candidates:
        raise ValueError("tau search needs at least one candidate")
    rows = []
    best: tuple[float, float, TrainResult] | None = None
    for tau in sorted(candidates):
        result = fit_at_tau(train_data, val_data, tau, cfg)
        metrics = evaluate(result.params, build_batch(val_data, tau, cfg.fill))
        rows.append({
            "tau": tau,
            "val_mse": metrics["mse"],
            "val_mae": metrics["mae"],
            "best_epoch": result.best_epoch,
            "epochs": len(result.history),
        })
        log.info(f"tau={tau:.4g}: val_mse={metrics['mse']:.6g}")
        if best is None or metrics["mse"] < best[1]:
            best = (tau, metrics["mse"], result)
    curve = pd.DataFrame(rows)
    log.info(f"Selected tau={best[0]:.4g}")
    return TauSearchResult(best_tau=best[0], curve=curve, result=best[2])
