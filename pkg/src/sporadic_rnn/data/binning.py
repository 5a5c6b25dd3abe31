"""Time binning of sporadic observations onto a τ-spaced grid."""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from sporadic_rnn.data.errors import DataError
from sporadic_rnn.models.series import SporadicSeries

log = logging.getLogger(__name__)

# Absorbs rounding when a time sits exactly on a bin edge.
EDGE_TOLERANCE = 1e-9


@dataclass
class BinnedSequence:
    """One subject's observations aligned into non-empty bins.

    `values` is K×N with NaN where `mask` is 0. `delta_t[k]` is the gap the
    k-th row is reached with; `delta_t[0]` is τ. A step that reads row k and
    predicts row k+1 is corrected with `delta_t[k + 1]`, so no step reads
    `delta_t[0]`.
    """

    subject_id: str
    values: np.ndarray
    mask: np.ndarray
    rep_times: np.ndarray
    delta_t: np.ndarray
    label: str | None = None

    def __post_init__(self):
        k = self.rep_times.shape[0]
        if self.values.shape != self.mask.shape or self.values.shape[0] != k:
            raise DataError(f"subject {self.subject_id}: inconsistent binned shapes")
        if self.delta_t.shape != (k,):
            raise DataError(f"subject {self.subject_id}: delta_t must have {k} entries")
        if np.any(np.diff(self.rep_times) <= 0):
            raise DataError(f"subject {self.subject_id}: bin times not strictly increasing")
        if np.any(self.delta_t <= 0):
            raise DataError(f"subject {self.subject_id}: non-positive time gap")

    @property
    def n_bins(self) -> int:
        return self.rep_times.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def series_frame(s: SporadicSeries) -> pd.DataFrame:
    """Observations of one subject as a (time, feature, value) frame."""
    return pd.DataFrame(
        [(o.time, o.feature, o.value) for o in s.observations],
        columns=["time", "feature", "value"],
    )


def bin_series(s: SporadicSeries, tau: float, n_features: int | None = None) -> BinnedSequence:
    """Average observations into width-τ bins anchored at the subject's first time.

    Empty bins are dropped. Each bin's time is the mean of the observation
    times it holds, and delta_t[0] = τ.
    """
    if tau <= 0:
        raise ValueError(f"bin width must be positive, got {tau}")
    df = series_frame(s)
    n_features = n_features or int(df["feature"].max()) + 1
    t0 = df["time"].min()
    df["bin"] = np.floor((df["time"] - t0) / tau + EDGE_TOLERANCE).astype(int)

    rep_times = df.groupby("bin")["time"].mean()
    if len(rep_times) < 2:
        raise DataError(f"subject {s.subject_id}: sequence too short ({len(rep_times)} bin)")
    values = (
        df.pivot_table(index="bin", columns="feature", values="value", aggfunc="mean")
        .reindex(index=rep_times.index, columns=range(n_features))
        .to_numpy(dtype=float)
    )
    times = rep_times.to_numpy()
    delta_t = np.concatenate([[tau], np.diff(times)])
    return BinnedSequence(
        subject_id=s.subject_id,
        values=values,
        mask=(~np.isnan(values)).astype(float),
        rep_times=times,
        delta_t=delta_t,
        label=s.label,
    )


def bin_dataset(
    series: list[SporadicSeries],
    tau: float,
    n_features: int,
) -> list[BinnedSequence]:
    """Bin every subject; subjects that collapse into one bin are skipped with a warning."""
    log.info(f"Binning {len(series)} subjects with tau={tau:.4g}")
    binned, dropped = [], []
    for s in series:
        try:
            binned.append(bin_series(s, tau, n_features))
        except DataError:
            dropped.append(s.subject_id)
    if dropped:
        log.warning(f"Dropped {len(dropped)} subjects with fewer than two bins at tau={tau:.4g}")
    if not binned:
        raise DataError(f"no subject has two or more bins at tau={tau:.4g}")
    return binned


def observed_gaps(series: list[SporadicSeries]) -> np.ndarray:
    """Gaps between consecutive distinct timestamps, pooled over subjects."""
    gaps = [np.diff(s.times) for s in series]
    return np.concatenate(gaps) if gaps else np.array([])
