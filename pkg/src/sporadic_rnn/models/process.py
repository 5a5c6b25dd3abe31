"""Pydantic model for the synthetic CAR(1) process generator."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sporadic_rnn.models.text import parse_matrix, parse_vector


class ProcessSpec(BaseModel):
    """A stable multivariate CAR(1) process plus its sampling scheme.

    Matrices may be given as nested lists or as "a b; c d" strings.
    """

    model_config = ConfigDict(extra="forbid")

    drift: list[list[float]]
    bias: list[float] | None = None
    diffusion_chol: list[list[float]] | None = None
    initial_mean: list[float] | None = None
    initial_cov: list[list[float]] | None = None
    arrival_rate: float = Field(default=1.0, gt=0)
    arrival: Literal["exponential", "uniform"] = "exponential"
    missing_prob: list[float] = Field(default_factory=lambda: [0.0])
    measurement_noise: float = Field(default=0.0, ge=0)
    noise: Literal["exact", "linear"] = "exact"
    horizon: float = Field(default=10.0, gt=0)
    n_subjects: int = Field(default=100, ge=1)
    seed: int = 0
    feature_names: list[str] | None = None

    @field_validator("drift", "diffusion_chol", "initial_cov", mode="before")
    @classmethod
    def coerce_matrix(cls, v):
        return parse_matrix(v)

    @field_validator("bias", "initial_mean", "missing_prob", mode="before")
    @classmethod
    def coerce_vector(cls, v):
        return parse_vector(v)

    @field_validator("feature_names", mode="before")
    @classmethod
    def coerce_names(cls, v):
        if isinstance(v, str):
            return [p.strip() for p in v.split(",") if p.strip()]
        return v

    @model_validator(mode="after")
    def check_process(self) -> "ProcessSpec":
        n = len(self.drift)
        if any(len(row) != n for row in self.drift):
            raise ValueError(f"drift must be square, got {n} rows of unequal length")
        for name in ("bias", "initial_mean"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != n:
                raise ValueError(f"{name} must have length {n}")
        for name in ("diffusion_chol", "initial_cov"):
            mat = getattr(self, name)
            if mat is not None and (len(mat) != n or any(len(r) != n for r in mat)):
                raise ValueError(f"{name} must be {n}x{n}")
        if len(self.missing_prob) == 1:
            self.missing_prob = self.missing_prob * n
        if len(self.missing_prob) != n or any(not 0 <= p < 1 for p in self.missing_prob):
            raise ValueError(f"missing_prob needs {n} entries in [0, 1)")
        if self.feature_names is not None and len(self.feature_names) != n:
            raise ValueError(f"feature_names must list {n} names")

        eig = np.linalg.eigvals(self.drift_matrix)
        if np.any(eig.real >= 0):
            report = ", ".join(f"{e.real:.4g}{e.imag:+.4g}j" for e in eig)
            raise ValueError(f"drift is not stable; eigenvalues: {report}")
        gamma = self.gamma
        if np.any(np.triu(gamma, k=1) != 0) or np.any(np.diag(gamma) < 0):
            raise ValueError("diffusion_chol must be lower-triangular with non-negative diagonal")
        return self

    @property
    def n_features(self) -> int:
        return len(self.drift)

    @property
    def names(self) -> list[str]:
        return self.feature_names or [f"x{i}" for i in range(self.n_features)]

    @property
    def drift_matrix(self) -> np.ndarray:
        return np.asarray(self.drift, dtype=float)

    @property
    def bias_vector(self) -> np.ndarray:
        return np.asarray(self.bias or [0.0] * self.n_features, dtype=float)

    @property
    def gamma(self) -> np.ndarray:
        if self.diffusion_chol is None:
            return np.zeros((self.n_features, self.n_features))
        return np.asarray(self.diffusion_chol, dtype=float)

    @property
    def psi(self) -> np.ndarray:
        """Diffusion matrix ΓΓᵀ."""
        return self.gamma @ self.gamma.T
