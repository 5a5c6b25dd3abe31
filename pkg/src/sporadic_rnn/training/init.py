"""Parameter initialization."""

import numpy as np

from sporadic_rnn.engine.cells import PEEPHOLES, CellParams, param_shapes
from sporadic_rnn.models.config import TrainConfig


def hidden_size(cfg: TrainConfig, n_features: int) -> int:
    if cfg.cell.base == "car":
        return n_features
    return cfg.hidden_multiplier * n_features


def init_params(
    cfg: TrainConfig,
    n_inputs: int,
    n_outputs: int,
    tau: float,
    rng: np.random.Generator,
) -> CellParams:
    """Fresh parameters for the configured cell.

    Weight matrices (and enabled peephole diagonals) are uniform in
    ±√(6 / (fan_in + fan_out)); biases, CAR parameters and imputer parameters
    start at zero. M = hidden_multiplier × N.
    """
    m = hidden_size(cfg, n_outputs)
    shapes = param_shapes(cfg.cell, n_inputs, m, n_outputs)
    tensors = {}
    for name, shape in shapes.items():
        if name.startswith(("W_", "U_")):
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            tensors[name] = rng.uniform(-bound, bound, size=shape)
        elif name in PEEPHOLES and cfg.peepholes:
            bound = np.sqrt(6.0 / (2 * shape[0]))
            tensors[name] = rng.uniform(-bound, bound, size=shape)
        else:
            tensors[name] = np.zeros(shape)
    return CellParams(
        cell=cfg.cell,
        tau=tau,
        tensors=tensors,
        hidden_activation=cfg.hidden_activation,
        gate_activation=cfg.gate_activation,
        input_activation=cfg.input_activation,
        peepholes=cfg.peepholes,
        impute=cfg.impute and cfg.fill is None,
    )
