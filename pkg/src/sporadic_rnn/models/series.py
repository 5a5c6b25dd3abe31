"""Pydantic models for sporadic (irregular, asynchronous) observations."""

import math
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator


class Observation(BaseModel):
    """One measured value of one feature at one time."""

    time: float = Field(ge=0.0)
    feature: int = Field(ge=0)
    value: float

    @field_validator("time", "value")
    @classmethod
    def finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v


class SporadicSeries(BaseModel):
    """All observations of a single subject."""

    subject_id: str
    observations: list[Observation]
    label: Literal["stable", "converting"] | None = None

    @model_validator(mode="after")
    def check_observations(self) -> "SporadicSeries":
        keys = [(o.time, o.feature) for o in self.observations]
        if len(set(keys)) != len(keys):
            raise ValueError(f"subject {self.subject_id}: duplicate (time, feature) pair")
        if len({o.time for o in self.observations}) < 2:
            raise ValueError(f"subject {self.subject_id}: fewer than two distinct timestamps")
        return self

    @property
    def times(self) -> list[float]:
        """Distinct timestamps in increasing order."""
        return sorted({o.time for o in self.observations})


class SporadicDataset(BaseModel):
    """A set of subjects sharing one feature vocabulary."""

    feature_names: list[str]
    series: list[SporadicSeries]

    @model_validator(mode="after")
    def check_features(self) -> "SporadicDataset":
        n = len(self.feature_names)
        for s in self.series:
            bad = {o.feature for o in s.observations if o.feature >= n}
            if bad:
                raise ValueError(f"subject {s.subject_id}: feature index {min(bad)} >= {n}")
        return self

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def subject_ids(self) -> list[str]:
        return [s.subject_id for s in self.series]

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    def subset(self, subject_ids: list[str]) -> "SporadicDataset":
        """Subjects with the given ids, in the given order."""
        by_id = {s.subject_id: s for s in self.series}
        missing = [i for i in subject_ids if i not in by_id]
        if missing:
            raise KeyError(f"subjects not in dataset: {missing[:5]}")
        return SporadicDataset(
            feature_names=self.feature_names,
            series=[by_id[i] for i in subject_ids],
        )
