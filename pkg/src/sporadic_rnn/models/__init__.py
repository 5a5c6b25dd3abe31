"""Data models for sporadic series, synthetic processes and run configuration."""

from sporadic_rnn.models.config import RunConfig, TrainConfig
from sporadic_rnn.models.enums import ALL_CELL_TYPES, Activation, CellType, FillMode
from sporadic_rnn.models.process import ProcessSpec
from sporadic_rnn.models.series import Observation, SporadicDataset, SporadicSeries

__all__ = [
    # Series
    "Observation",
    "SporadicSeries",
    "SporadicDataset",
    # Synthetic process
    "ProcessSpec",
    # Configuration
    "TrainConfig",
    "RunConfig",
    # Enums
    "Activation",
    "CellType",
    "FillMode",
    "ALL_CELL_TYPES",
]
