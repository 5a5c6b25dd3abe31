"""Evaluation and rollout prediction from a saved checkpoint."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from sporadic_rnn.data.binning import BinnedSequence, bin_dataset
from sporadic_rnn.data.csv_io import dataset_frame, read_csv
from sporadic_rnn.data.examples import build_batch, make_example
from sporadic_rnn.data.standardize import Standardizer
from sporadic_rnn.engine.batch import SequenceBatch
from sporadic_rnn.engine.bptt import model_inputs
from sporadic_rnn.engine.cells import CellParams, cell_step, forward_sequence
from sporadic_rnn.engine.numerics import ShapeError
from sporadic_rnn.models.enums import FillMode
from sporadic_rnn.models.series import SporadicDataset
from sporadic_rnn.pipeline.stages import stage
from sporadic_rnn.storage.checkpoint import CheckpointMeta, load_checkpoint
from sporadic_rnn.storage.hashing import compute_frame_hash
from sporadic_rnn.storage.reports import write_frame, write_report
from sporadic_rnn.training.metrics import evaluate, masked_errors

log = logging.getLogger(__name__)


def load_for_checkpoint(data_path: Path | str, meta: CheckpointMeta) -> SporadicDataset:
    """Read data against the checkpoint's feature vocabulary."""
    data = read_csv(data_path, feature_names=meta.feature_names or None)
    if data.n_features != meta.n_outputs:
        raise ShapeError(f"model predicts {meta.n_outputs} features, data has {data.n_features}")
    return data


def _standardizer(meta: CheckpointMeta) -> Standardizer:
    if meta.standardizer is None:
        raise ValueError("checkpoint carries no standardizer")
    return meta.standardizer


def select_subjects(data: SporadicDataset, meta: CheckpointMeta, subset: str) -> SporadicDataset:
    """The checkpoint's recorded split (`train`, `val`, `test`) or every subject (`all`)."""
    if subset == "all":
        return data
    ids = meta.split.get(subset)
    if not ids:
        raise ValueError(f"checkpoint records no '{subset}' subjects")
    return data.subset(ids)


def run_eval(
    model_path: Path | str,
    data_path: Path | str,
    out: Path | str | None = None,
    subset: str = "test",
) -> dict:
    """MAE/MSE of a checkpoint on one split of a data file.

    Returns:
        Stats dict with the metrics and the hash of the evaluated data.
    """
    with stage("load"):
        params, meta = load_checkpoint(model_path)
        data = select_subjects(load_for_checkpoint(data_path, meta), meta, subset)
    with stage("evaluate"):
        standardized = _standardizer(meta).transform(data)
        metrics = evaluate(params, build_batch(standardized, meta.tau, meta.fill))
    stats = {
        "cell": meta.cell.value,
        "subset": subset,
        "subjects": len(data),
        "mae": metrics["mae"],
        "mse": metrics["mse"],
        "n_targets": metrics["n_targets"],
        "data_hash": compute_frame_hash(dataset_frame(data)),
    }
    if out is not None:
        write_report(Path(out) / "eval", stats)
    log.info(f"Evaluation complete: {stats}")
    return stats


def rollout(
    p: CellParams,
    seq: BinnedSequence,
    n_context: int,
    fill: FillMode | None = None,
) -> np.ndarray:
    """Predict rows 2..K of a binned sequence from its first `n_context` rows.

    The first n_context steps read observed inputs; every later step reads the
    previous prediction. Returns a (K−1)×Q array; row j predicts bin j+1.
    """
    if n_context < 1:
        raise ValueError("n_context must be at least 1")
    n_ctx = min(n_context, seq.n_bins - 1)
    context = BinnedSequence(
        subject_id=seq.subject_id,
        values=seq.values[: n_ctx + 1],
        mask=seq.mask[: n_ctx + 1],
        rep_times=seq.rep_times[: n_ctx + 1],
        delta_t=seq.delta_t[: n_ctx + 1],
    )
    tau_pad = p.tau if p.tau > 0 else 1.0
    batch = SequenceBatch.from_examples([make_example(context, fill)], tau_pad)
    x, _, _ = model_inputs(p, batch)
    y, cache = forward_sequence(p, x[0], batch.delta_t[0])
    preds = list(y)
    state = cache.final_state
    for j in range(n_ctx, seq.n_bins - 1):
        gap = seq.delta_t[j + 1]
        x_j = preds[-1]
        if fill is FillMode.nearest_concat:
            x_j = np.append(x_j, gap)
        y_j, state, _ = cell_step(p, x_j, state, gap, step=j)
        preds.append(y_j)
    return np.array(preds)


def prediction_frame(
    seq: BinnedSequence,
    preds: np.ndarray,
    n_context: int,
    scaler: Standardizer,
) -> pd.DataFrame:
    """Long table of predicted vs observed values per bin and feature."""
    rows = np.arange(1, seq.n_bins)
    horizon = np.maximum(1, rows - n_context + 1)
    n_feat = preds.shape[1]
    observed = seq.values[1:]
    return pd.DataFrame({
        "subject_id": seq.subject_id,
        "bin": np.repeat(rows, n_feat),
        "time": np.repeat(seq.rep_times[1:] * scaler.time_iqr, n_feat),
        "horizon": np.repeat(horizon, n_feat),
        "feature": np.tile(scaler.feature_names, len(rows)),
        "predicted": preds.ravel(),
        "observed": observed.ravel(),
        "available": seq.mask[1:].ravel().astype(int),
        "predicted_raw": scaler.inverse_values(preds).ravel(),
        "observed_raw": scaler.inverse_values(observed).ravel(),
    })


def horizon_table(frame: pd.DataFrame) -> pd.DataFrame:
    """MAE/MSE of available cells by steps after the context."""
    rows = []
    for h, group in frame.groupby("horizon"):
        avail = group["available"].to_numpy()
        if avail.sum() == 0:
            continue
        observed = np.nan_to_num(group["observed"].to_numpy())
        err = masked_errors(group["predicted"].to_numpy(), observed, avail)
        rows.append({"horizon": int(h), **err})
    return pd.DataFrame(rows, columns=["horizon", "mae", "mse", "n_targets"])


def run_predict(
    model_path: Path | str,
    data_path: Path | str,
    n_context: int,
    out: Path | str,
    subset: str = "all",
) -> dict:
    """Roll a checkpoint forward from `n_context` observed bins per subject.

    Writes predictions.csv and horizon_errors.csv to `out`.

    Returns:
        Stats dict with counts and the one-step and overall errors.
    """
    out = Path(out)
    with stage("load"):
        params, meta = load_checkpoint(model_path)
        data = select_subjects(load_for_checkpoint(data_path, meta), meta, subset)
        scaler = _standardizer(meta)
    with stage("predict"):
        standardized = scaler.transform(data)
        frames = [
            prediction_frame(seq, rollout(params, seq, n_context, meta.fill), n_context, scaler)
            for seq in bin_dataset(standardized.series, meta.tau, standardized.n_features)
        ]
        predictions = pd.concat(frames, ignore_index=True)
        by_horizon = horizon_table(predictions)
    with stage("write"):
        write_frame(out / "predictions.csv", predictions)
        write_frame(out / "horizon_errors.csv", by_horizon)

    stats = {
        "cell": meta.cell.value,
        "subjects": len(frames),
        "n_context": n_context,
        "predictions": len(predictions),
        "max_horizon": int(predictions["horizon"].max()),
        "one_step_mae": float(by_horizon["mae"].iloc[0]) if len(by_horizon) else float("nan"),
        "predictions_path": str(out / "predictions.csv"),
    }
    log.info(f"Prediction complete: {stats}")
    return stats
