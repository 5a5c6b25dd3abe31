"""End-to-end training behind `sporadic-rnn train`."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sporadic_rnn.data.csv_io import dataset_frame, read_csv
from sporadic_rnn.data.examples import build_batch
from sporadic_rnn.data.standardize import Standardizer, fit_standardizer
from sporadic_rnn.models.config import RunConfig
from sporadic_rnn.models.series import SporadicDataset
from sporadic_rnn.pipeline.stages import stage
from sporadic_rnn.storage.checkpoint import meta_for, save_checkpoint
from sporadic_rnn.storage.hashing import compute_frame_hash
from sporadic_rnn.storage.reports import write_frame, write_report
from sporadic_rnn.training.metrics import evaluate
from sporadic_rnn.training.tau_search import default_tau_candidates, fit_at_tau, tau_search

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


def split_subjects(
    subject_ids: list[str],
    val_fraction: float,
    test_fraction: float,
    seed: int,
) -> dict[str, list[str]]:
    """Seeded random train/val/test partition of subject ids."""
    rng = np.random.default_rng(seed)
    order = [subject_ids[i] for i in rng.permutation(len(subject_ids))]
    n = len(order)
    n_test = round(test_fraction * n)
    n_val = round(val_fraction * n)
    if n - n_test - n_val < 1:
        raise ValueError(f"{n} subjects leave no training data after the split")
    return {
        "test": order[:n_test],
        "val": order[n_test : n_test + n_val],
        "train": order[n_test + n_val :],
    }


@dataclass
class PreparedData:
    raw: dict[str, SporadicDataset]
    standardized: dict[str, SporadicDataset]
    standardizer: Standardizer
    split: dict[str, list[str]]


def prepare_data(data: SporadicDataset, cfg: RunConfig) -> PreparedData:
    """Split by subject, fit the standardizer on training subjects, transform all."""
    split = split_subjects(data.subject_ids, cfg.val_fraction, cfg.test_fraction, cfg.seed)
    raw = {name: data.subset(ids) for name, ids in split.items() if ids}
    scaler = fit_standardizer(raw["train"])
    standardized = {name: scaler.transform(ds) for name, ds in raw.items()}
    log.info(
        "Split: " + ", ".join(f"{name}={len(split[name])}" for name in SPLITS)
    )
    return PreparedData(raw, standardized, scaler, split)


def run_training(cfg: RunConfig) -> dict:
    """Load, split, standardize, bin, train, evaluate and save.

    Writes model.ckpt, history.csv, tau_curve.csv and report.{txt,csv} to
    `cfg.out`.

    Returns:
        Stats dict with the chosen τ and MAE/MSE per split.
    """
    out = Path(cfg.out)
    train_cfg = cfg.train_config()

    with stage("load"):
        if cfg.data is None:
            raise ValueError("no data file given (--data or data = ... in the config)")
        data = read_csv(cfg.data)
    with stage("prepare"):
        prep = prepare_data(data, cfg)
    with stage("train"):
        raw_candidates = cfg.tau or default_tau_candidates(prep.raw["train"])
        candidates = [prep.standardizer.scale_time(t) for t in raw_candidates]
        train_std = prep.standardized["train"]
        val_std = prep.standardized.get("val")
        if len(candidates) > 1:
            if val_std is None:
                raise ValueError("tau search needs validation subjects (val_fraction > 0)")
            search = tau_search(train_std, val_std, candidates, train_cfg)
            tau, result, curve = search.best_tau, search.result, search.curve
        else:
            tau = candidates[0]
            result = fit_at_tau(train_std, val_std, tau, train_cfg)
            curve = None
        tau_raw = raw_candidates[candidates.index(tau)]
    with stage("evaluate"):
        metrics = {
            name: evaluate(result.params, build_batch(ds, tau, cfg.fill))
            for name, ds in prep.standardized.items()
        }
    with stage("save"):
        meta = meta_for(
            result.params,
            tau_raw=tau_raw,
            fill=cfg.fill,
            feature_names=data.feature_names,
            standardizer=prep.standardizer,
            split=prep.split,
            config=cfg.model_dump(mode="json"),
        )
        tensor_hash = save_checkpoint(out / "model.ckpt", result.params, meta)
        write_frame(out / "history.csv", result.history)
        if curve is not None:
            curve = curve.assign(tau_raw=[raw_candidates[candidates.index(t)] for t in curve["tau"]])
            write_frame(out / "tau_curve.csv", curve)

    stats = {
        "cell": cfg.cell.value,
        "fill": cfg.fill.value if cfg.fill else "none",
        "tau": tau_raw,
        "tau_normalized": tau,
        "epochs": len(result.history),
        "best_epoch": result.best_epoch,
        "stopped_early": result.stopped_early,
    }
    for name in SPLITS:
        if name in metrics:
            stats[f"{name}_mae"] = metrics[name]["mae"]
            stats[f"{name}_mse"] = metrics[name]["mse"]
    stats["tensor_hash"] = tensor_hash
    stats["data_hash"] = compute_frame_hash(dataset_frame(data))
    stats["checkpoint"] = str(out / "model.ckpt")
    write_report(out / "report", stats)
    log.info(f"Training complete: {stats}")
    return stats
