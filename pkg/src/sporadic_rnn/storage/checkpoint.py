"""Plain-text model checkpoints.

Layout::

    sporadic-rnn-checkpoint 1
    meta {...json...}
    tensor <name> <rows> <cols>
    <rows lines of <cols> values at 17 significant digits>
    ...
    end

Vectors are written as n×1 blocks.
"""

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from sporadic_rnn.data.standardize import Standardizer
from sporadic_rnn.engine.cells import CellParams, param_shapes
from sporadic_rnn.engine.numerics import Activation
from sporadic_rnn.models.enums import CellType, FillMode
from sporadic_rnn.storage.hashing import compute_tensor_hash

log = logging.getLogger(__name__)

FORMAT_TAG = "sporadic-rnn-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """A checkpoint file is malformed, of another version, or corrupted."""


class CheckpointMeta(BaseModel):
    """Everything besides the tensors needed to rebuild and re-evaluate a model."""

    cell: CellType
    n_inputs: int
    n_hidden: int
    n_outputs: int
    tau: float
    tau_raw: float | None = None
    hidden_activation: Activation
    gate_activation: Activation
    input_activation: Activation
    peepholes: bool
    impute: bool
    fill: FillMode | None = None
    feature_names: list[str] = Field(default_factory=list)
    standardizer: Standardizer | None = None
    split: dict[str, list[str]] = Field(default_factory=dict)
    config: dict = Field(default_factory=dict)
    tensor_hash: str = ""


def meta_for(p: CellParams, **extra) -> CheckpointMeta:
    return CheckpointMeta(
        cell=p.cell,
        n_inputs=p.n_inputs,
        n_hidden=p.n_hidden,
        n_outputs=p.n_outputs,
        tau=p.tau,
        hidden_activation=p.hidden_activation,
        gate_activation=p.gate_activation,
        input_activation=p.input_activation,
        peepholes=p.peepholes,
        impute=p.impute,
        **extra,
    )


def _format_row(values) -> str:
    return " ".join(f"{float(x):.17g}" for x in values)


def save_checkpoint(path: Path | str, p: CellParams, meta: CheckpointMeta) -> str:
    """Write a checkpoint; returns the tensor hash recorded in it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = meta.model_copy(update={"tensor_hash": compute_tensor_hash(p.tensors)})
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION}", f"meta {meta.model_dump_json()}"]
    for name, arr in p.tensors.items():
        block = arr.reshape(arr.shape[0], -1)
        lines.append(f"tensor {name} {block.shape[0]} {block.shape[1]}")
        lines.extend(_format_row(row) for row in block)
    lines.append("end")
    path.write_text("\n".join(lines) + "\n")
    log.info(f"Saved {p.cell.value} checkpoint to {path}")
    return meta.tensor_hash


def load_checkpoint(path: Path | str) -> tuple[CellParams, CheckpointMeta]:
    """Read a checkpoint, checking version, shapes and the tensor hash."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith(FORMAT_TAG + " "):
        raise CheckpointError(f"{path} is not a {FORMAT_TAG} file")
    version = lines[0].split()[1]
    if version != str(FORMAT_VERSION):
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    if len(lines) < 2 or not lines[1].startswith("meta "):
        raise CheckpointError(f"{path}: missing meta line")
    meta = CheckpointMeta(**json.loads(lines[1][len("meta "):]))

    shapes = param_shapes(meta.cell, meta.n_inputs, meta.n_hidden, meta.n_outputs)
    tensors: dict[str, np.ndarray] = {}
    i = 2
    while i < len(lines) and lines[i] != "end":
        parts = lines[i].split()
        if len(parts) != 4 or parts[0] != "tensor":
            raise CheckpointError(f"{path}:{i + 1}: expected a tensor header")
        name, rows, cols = parts[1], int(parts[2]), int(parts[3])
        if name not in shapes:
            raise CheckpointError(f"{path}: unexpected tensor {name} for a {meta.cell.value} cell")
        block = [[float(v) for v in line.split()] for line in lines[i + 1 : i + 1 + rows]]
        arr = np.array(block, dtype=float).reshape(rows, cols)
        if arr.size != int(np.prod(shapes[name])):
            raise CheckpointError(f"{path}: tensor {name} has {arr.size} values")
        tensors[name] = arr.reshape(shapes[name])
        i += 1 + rows
    if i >= len(lines):
        raise CheckpointError(f"{path}: missing end marker")
    missing = sorted(set(shapes) - set(tensors))
    if missing:
        raise CheckpointError(f"{path}: missing tensors {missing}")

    if meta.tensor_hash and compute_tensor_hash(tensors) != meta.tensor_hash:
        raise CheckpointError(f"{path}: tensor hash mismatch")
    params = CellParams(
        cell=meta.cell,
        tau=meta.tau,
        tensors={name: tensors[name] for name in shapes},
        hidden_activation=meta.hidden_activation,
        gate_activation=meta.gate_activation,
        input_activation=meta.input_activation,
        peepholes=meta.peepholes,
        impute=meta.impute,
    )
    return params, meta
