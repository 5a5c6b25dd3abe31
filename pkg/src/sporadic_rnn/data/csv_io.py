"""Long-format CSV reading and writing: one row per observation."""

import logging
import math
import re
from pathlib import Path

import numpy as np
import pandas as pd

from sporadic_rnn.data.errors import DataError
from sporadic_rnn.models.series import Observation, SporadicDataset, SporadicSeries

log = logging.getLogger(__name__)

COLUMNS = ["subject_id", "time", "feature", "value"]
LABEL_COLUMN = "label"


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return math.nan


def _numeric(df: pd.DataFrame, column: str) -> pd.Series:
    # float() parses 17-digit text back to the exact double
    parsed = df[column].str.strip().map(_parse_float).astype(float)
    bad = ~np.isfinite(parsed)
    if bad.any():
        idx = int(np.flatnonzero(bad.to_numpy())[0])
        raw = df[column].iloc[idx]
        raise DataError(f"invalid {column} '{raw}'", line=idx + 2)
    return parsed


def read_csv(path: Path | str, feature_names: list[str] | None = None) -> SporadicDataset:
    """Read a long-format file into a dataset.

    Feature names are taken in order of first appearance unless `feature_names`
    fixes the vocabulary, in which case unknown names are an error.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        found = re.search(r"line (\d+)", str(e))
        raise DataError(
            f"{path}: malformed row: {e}", line=int(found.group(1)) if found else None
        ) from e
    missing = [c for c in COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}; expected header {','.join(COLUMNS)}")
    if df.empty:
        raise DataError(f"{path}: no observations")

    empty_id = df["subject_id"].str.strip() == ""
    if empty_id.any():
        raise DataError("empty subject_id", line=int(np.flatnonzero(empty_id.to_numpy())[0]) + 2)
    times = _numeric(df, "time")
    values = _numeric(df, "value")

    names = df["feature"].str.strip()
    vocabulary = list(feature_names) if feature_names else list(dict.fromkeys(names))
    index = {name: i for i, name in enumerate(vocabulary)}
    unknown = ~names.isin(index)
    if unknown.any():
        idx = int(np.flatnonzero(unknown.to_numpy())[0])
        raise DataError(f"unknown feature '{names.iloc[idx]}'", line=idx + 2)

    frame = pd.DataFrame({
        "subject_id": df["subject_id"].str.strip(),
        "time": times,
        "feature": names.map(index),
        "value": values,
        "label": df[LABEL_COLUMN].str.strip() if LABEL_COLUMN in df.columns else "",
    })
    repeated = frame.duplicated(["subject_id", "time", "feature"])
    if repeated.any():
        idx = int(np.flatnonzero(repeated.to_numpy())[0])
        raise DataError(
            f"duplicate (time, feature) pair for subject '{frame['subject_id'].iloc[idx]}'",
            line=idx + 2,
        )
    series = []
    for subject_id, group in frame.groupby("subject_id", sort=False):
        labels = {lab for lab in group["label"] if lab}
        series.append(
            SporadicSeries(
                subject_id=str(subject_id),
                label=labels.pop() if len(labels) == 1 else None,
                observations=[
                    Observation(time=t, feature=int(f), value=v)
                    for t, f, v in zip(group["time"], group["feature"], group["value"], strict=True)
                ],
            )
        )
    log.info(f"Read {len(frame)} observations of {len(series)} subjects from {path}")
    return SporadicDataset(feature_names=vocabulary, series=series)


def dataset_frame(data: SporadicDataset) -> pd.DataFrame:
    """Long-format frame of a dataset, in subject then observation order."""
    rows = [
        (s.subject_id, o.time, data.feature_names[o.feature], o.value, s.label or "")
        for s in data
        for o in s.observations
    ]
    df = pd.DataFrame(rows, columns=COLUMNS + [LABEL_COLUMN])
    if not (df[LABEL_COLUMN] != "").any():
        df = df.drop(columns=[LABEL_COLUMN])
    return df


def write_csv(data: SporadicDataset, path: Path | str) -> int:
    """Write a dataset with 17 significant digits; returns the row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = dataset_frame(data)
    df.to_csv(path, index=False, float_format="%.17g")
    log.info(f"Wrote {len(df)} observations to {path}")
    return len(df)
