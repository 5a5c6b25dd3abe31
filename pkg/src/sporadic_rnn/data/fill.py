"""Baseline missing-value fills for the plain GRU comparisons."""

import numpy as np

from sporadic_rnn.data.binning import BinnedSequence
from sporadic_rnn.models.enums import FillMode


def _forward(values: np.ndarray, mask: np.ndarray, leading: str) -> np.ndarray:
    """Carry each feature's last observation forward.

    Cells before a feature's first observation get 0 (`leading="mean"`) or its
    first observation (`leading="next"`); features never observed get 0.
    """
    out = np.zeros_like(values)
    observed = mask > 0
    for n in range(values.shape[1]):
        rows = np.flatnonzero(observed[:, n])
        if rows.size == 0:
            continue
        # index of the latest observed row at or before each k
        last = np.maximum.accumulate(np.where(observed[:, n], np.arange(len(values)), -1))
        src = np.where(last >= 0, last, rows[0] if leading == "next" else -1)
        out[:, n] = np.where(src >= 0, values[np.maximum(src, 0), n], 0.0)
    return out


def apply_baseline_fill(seq: BinnedSequence, mode: FillMode | str) -> BinnedSequence:
    """Fill missing cells so the mask becomes all ones.

    Values are assumed standardized, so the mean fill is 0. `forward` carries the
    last observation forward and mean-fills leading gaps. `nearest_concat`
    carries the nearest observation that is not in the future (the next one for
    leading gaps) and appends the row's delta_t as an extra column.
    """
    mode = FillMode(mode)
    if mode is FillMode.mean:
        values = np.where(seq.mask > 0, seq.values, 0.0)
    elif mode is FillMode.forward:
        values = _forward(seq.values, seq.mask, leading="mean")
    else:
        values = _forward(seq.values, seq.mask, leading="next")
        values = np.column_stack([values, seq.delta_t])
    return BinnedSequence(
        subject_id=seq.subject_id,
        values=values,
        mask=np.ones_like(values),
        rep_times=seq.rep_times,
        delta_t=seq.delta_t,
        label=seq.label,
    )
