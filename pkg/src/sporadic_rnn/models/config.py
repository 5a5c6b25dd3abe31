"""Training and run configuration models."""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sporadic_rnn.engine.numerics import Activation
from sporadic_rnn.models.enums import CellType, FillMode
from sporadic_rnn.models.text import parse_vector


class TrainConfig(BaseModel):
    """Model and optimizer hyperparameters.

    `tau` is a single width or a list of candidates searched on validation MSE;
    None derives the candidates from the training gaps. Values are in raw data
    time units and are divided by the standardizer's IQR before use.
    """

    model_config = ConfigDict(extra="forbid")

    cell: CellType = CellType.car_gru
    hidden_multiplier: int = Field(default=10, ge=1)
    tau: list[float] | None = None

    learning_rate: float = Field(default=5e-3, gt=0)
    beta1: float = Field(default=0.85, gt=0, lt=1)
    beta2: float = Field(default=0.95, gt=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)
    weight_decay: float = Field(default=5e-5, ge=0)
    max_epochs: int = Field(default=100, ge=1)
    patience: int = Field(default=10, ge=1)
    batch_fraction: float = Field(default=0.9, gt=0, le=1)
    seed: int = 0
    clip_norm: float | None = Field(default=None, gt=0)

    peepholes: bool = True
    impute: bool = True
    fill: FillMode | None = None
    hidden_activation: Activation = Activation.identity
    gate_activation: Activation = Activation.sigmoid
    input_activation: Activation = Activation.tanh

    @field_validator("tau", mode="before")
    @classmethod
    def coerce_tau(cls, v):
        return parse_vector(v)

    @field_validator("tau")
    @classmethod
    def positive_tau(cls, v: list[float] | None) -> list[float] | None:
        if v is not None:
            if not v:
                raise ValueError("tau needs at least one candidate")
            if any(t <= 0 for t in v):
                raise ValueError("tau candidates must be positive")
        return v

    @field_validator("fill", mode="before")
    @classmethod
    def coerce_fill(cls, v):
        if isinstance(v, str) and v.strip().lower() in ("", "none"):
            return None
        return v


class RunConfig(TrainConfig):
    """A TrainConfig plus the data location and the train/val/test split."""

    data: Path | None = None
    out: Path = Path("runs/latest")
    val_fraction: float = Field(default=0.1, ge=0, lt=1)
    test_fraction: float = Field(default=0.2, ge=0, lt=1)

    @model_validator(mode="after")
    def check_split(self) -> "RunConfig":
        if self.val_fraction + self.test_fraction >= 1:
            raise ValueError("val_fraction + test_fraction must leave training data")
        return self

    def train_config(self) -> TrainConfig:
        fields = set(TrainConfig.model_fields)
        return TrainConfig(**self.model_dump(include=fields))
