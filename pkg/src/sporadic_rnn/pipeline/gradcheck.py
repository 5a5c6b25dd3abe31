"""Finite-difference verification of every analytic gradient.

Each variant is checked on random problems: random shapes, irregular gaps,
random input and target masks, and random parameters. Finite differences use
Richardson extrapolation in extended precision.
"""

import logging
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import pandas as pd

from sporadic_rnn.data.binning import BinnedSequence
from sporadic_rnn.data.examples import make_example
from sporadic_rnn.engine.batch import SequenceBatch
from sporadic_rnn.engine.bptt import loss_and_gradients, richardson_difference
from sporadic_rnn.engine.cells import PEEPHOLES, CellParams, param_shapes
from sporadic_rnn.engine.numerics import Activation
from sporadic_rnn.models.enums import CellType

log = logging.getLogger(__name__)

TOLERANCE = 1e-6
GRADCHECK_CELLS = ("car_rnn", "car_lstm", "car_gru", "car")


@dataclass(frozen=True)
class Variant:
    name: str
    cell: CellType
    settings: dict = field(default_factory=dict)


def variants(cell: str = "all") -> list[Variant]:
    """The cell/activation/peephole combinations checked for `cell` (or all)."""
    out = []
    acts = (Activation.identity, Activation.tanh)
    for act in acts:
        out.append(Variant(f"car_rnn/{act.value}", CellType.car_rnn, {"hidden_activation": act}))
    for peep, act in product((True, False), acts):
        tag = "peepholes" if peep else "no-peepholes"
        out.append(
            Variant(
                f"car_lstm/{tag}/{act.value}",
                CellType.car_lstm,
                {"hidden_activation": act, "peepholes": peep},
            )
        )
    for act in acts:
        out.append(Variant(f"car_gru/{act.value}", CellType.car_gru, {"hidden_activation": act}))
    out.append(Variant("car", CellType.car))
    if cell == "all":
        return out
    if cell not in GRADCHECK_CELLS:
        raise ValueError(f"unknown cell '{cell}'; choose from {', '.join(GRADCHECK_CELLS)} or all")
    return [v for v in out if v.cell.value == cell]


def random_sequence(
    subject_id: str,
    n_bins: int,
    n_features: int,
    rng: np.random.Generator,
) -> BinnedSequence:
    """Random values with irregular gaps and a random mask (≥1 observed per bin)."""
    gaps = rng.uniform(0.3, 2.0, size=n_bins)
    mask = (rng.random((n_bins, n_features)) < 0.7).astype(float)
    for k in np.flatnonzero(mask.sum(axis=1) == 0):
        mask[k, rng.integers(n_features)] = 1.0
    values = np.where(mask > 0, rng.normal(size=(n_bins, n_features)), np.nan)
    times = np.cumsum(gaps)
    return BinnedSequence(
        subject_id=subject_id,
        values=values,
        mask=mask,
        rep_times=times,
        delta_t=np.concatenate([[1.0], np.diff(times)]),
    )


def random_problem(variant: Variant, rng: np.random.Generator) -> tuple[CellParams, SequenceBatch]:
    """Two sequences of unequal length and N(0, 0.5²) parameters, τ = 1."""
    n = int(rng.choice([2, 3]))
    m = n if variant.cell.base == "car" else int(rng.choice([4, 6]))
    k = int(rng.choice([3, 7]))
    tau = 1.0
    seqs = [random_sequence("a", k + 1, n, rng), random_sequence("b", k, n, rng)]
    batch = SequenceBatch.from_examples([make_example(s) for s in seqs], tau)
    tensors = {}
    for name, shape in param_shapes(variant.cell, n, m, n).items():
        if name in PEEPHOLES and not variant.settings.get("peepholes", True):
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.normal(0.0, 0.5, size=shape)
    params = CellParams(cell=variant.cell, tau=tau, tensors=tensors, **variant.settings)
    return params, batch


def check_gradients(
    p: CellParams,
    batch: SequenceBatch,
    tolerance: float = TOLERANCE,
) -> pd.DataFrame:
    """Compare analytic and numeric gradients coordinate by coordinate.

    Returns one row per trainable tensor with its worst relative error
    |a − f| / max(|f|, 1e-8).
    """
    _, grads = loss_and_gradients(p, batch)
    rows = []
    for name in p.trainable_names():
        worst = (-1.0, None, 0.0, 0.0)
        for index in np.ndindex(p[name].shape):
            numeric = richardson_difference(p, batch, name, index)
            analytic = float(grads[name][index])
            rel = abs(analytic - numeric) / max(abs(numeric), 1e-8)
            if rel > worst[0]:
                worst = (rel, index, analytic, numeric)
        rel, index, analytic, numeric = worst
        rows.append({
            "param": name,
            "max_rel_err": rel,
            "index": str(tuple(int(i) for i in index)),
            "analytic": analytic,
            "numeric": numeric,
            "passed": rel <= tolerance,
        })
    return pd.DataFrame(rows)


def run_gradcheck(
    cell: str = "all",
    seed: int = 0,
    n_configs: int = 5,
    tolerance: float = TOLERANCE,
) -> tuple[pd.DataFrame, dict]:
    """Check every variant of `cell` on `n_configs` random problems.

    Returns:
        The per-tensor report and a stats dict; `passed` is False on any breach.
    """
    frames = []
    for v_idx, variant in enumerate(variants(cell)):
        for config in range(n_configs):
            rng = np.random.default_rng([seed, v_idx, config])
            params, batch = random_problem(variant, rng)
            report = check_gradients(params, batch, tolerance)
            report.insert(0, "variant", variant.name)
            report.insert(1, "config", config)
            frames.append(report)
            log.debug(f"{variant.name} config {config}: max rel err {report['max_rel_err'].max():.3g}")
    report = pd.concat(frames, ignore_index=True)
    failures = report.loc[~report["passed"]]
    stats = {
        "variants": report["variant"].nunique(),
        "configs": n_configs,
        "checks": len(report),
        "max_rel_err": float(report["max_rel_err"].max()),
        "failures": len(failures),
        "failed_params": ", ".join(sorted(set(failures["param"]))),
        "passed": failures.empty,
    }
    if failures.empty:
        log.info(f"Gradient check passed: {stats}")
    else:
        log.warning(f"Gradient check failed: {stats}")
    return report, stats
