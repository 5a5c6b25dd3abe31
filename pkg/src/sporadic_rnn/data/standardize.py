"""Per-feature standardization and IQR time normalization."""

import logging

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from sporadic_rnn.data.errors import DataError
from sporadic_rnn.models.series import Observation, SporadicDataset, SporadicSeries

log = logging.getLogger(__name__)


class Standardizer(BaseModel):
    """Maps values to (v − μ)/σ per feature and times to t / IQR."""

    feature_names: list[str]
    mean: list[float]
    std: list[float]
    time_iqr: float = Field(gt=0)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def transform_series(self, s: SporadicSeries) -> SporadicSeries:
        mu, sd = self.mean, self.std
        return SporadicSeries(
            subject_id=s.subject_id,
            label=s.label,
            observations=[
                Observation(
                    time=o.time / self.time_iqr,
                    feature=o.feature,
                    value=(o.value - mu[o.feature]) / sd[o.feature],
                )
                for o in s.observations
            ],
        )

    def transform(self, data: SporadicDataset) -> SporadicDataset:
        return SporadicDataset(
            feature_names=data.feature_names,
            series=[self.transform_series(s) for s in data],
        )

    def scale_time(self, t):
        """Raw time units → normalized units."""
        return t / self.time_iqr

    def inverse_values(self, values: np.ndarray) -> np.ndarray:
        """Standardized values (…×N) back to original units."""
        return values * np.asarray(self.std) + np.asarray(self.mean)


def observation_frame(data: SporadicDataset) -> pd.DataFrame:
    """All observations as one (subject_id, time, feature, value) frame."""
    rows = [
        (s.subject_id, o.time, o.feature, o.value)
        for s in data
        for o in s.observations
    ]
    return pd.DataFrame(rows, columns=["subject_id", "time", "feature", "value"])


def fit_standardizer(train: SporadicDataset) -> Standardizer:
    """Fit on training subjects only.

    Uses the population standard deviation and the type-7 interquartile range
    of each subject's distinct timestamps, pooled.
    """
    df = observation_frame(train)
    stats = df.groupby("feature")["value"].agg(["mean", lambda v: v.std(ddof=0)])
    stats.columns = ["mean", "std"]
    stats = stats.reindex(range(train.n_features))
    for idx, row in stats.iterrows():
        name = train.feature_names[idx]
        if np.isnan(row["mean"]):
            raise DataError(f"feature '{name}' has no training observations")
        if not row["std"] > 0:
            raise DataError(f"feature '{name}' is constant in the training data")

    times = df.drop_duplicates(["subject_id", "time"])["time"].to_numpy()
    q1, q3 = np.percentile(times, [25, 75])
    iqr = float(q3 - q1)
    if not iqr > 0:
        raise DataError("training timestamps have zero interquartile range")

    scaler = Standardizer(
        feature_names=train.feature_names,
        mean=stats["mean"].tolist(),
        std=stats["std"].tolist(),
        time_iqr=iqr,
    )
    log.info(f"Fitted standardizer on {len(train)} subjects: time IQR={iqr:.4g}")
    return scaler
