"""Forward passes of the CAR-corrected RNN, peephole LSTM and GRU cells.

Every step function takes one input vector (or a batch of them, one per row),
the previous state and the time gap, and returns the new state together with a
cache entry holding the pre- and post-activation vectors the backward pass needs.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from sporadic_rnn.engine.car import CarLayer, UnivariateImputer, car_correct
from sporadic_rnn.engine.numerics import (
    Activation,
    ShapeError,
    Vector,
    activate,
    hadamard,
    matvec,
)
from sporadic_rnn.models.enums import CellType

log = logging.getLogger(__name__)

LSTM_GATES = ("f", "i", "z", "o")
GRU_GATES = ("z", "r", "c")
PEEPHOLES = ("V_f", "V_i", "V_o")


def param_shapes(
    cell: CellType,
    n_inputs: int,
    n_hidden: int,
    n_outputs: int,
) -> dict[str, tuple[int, ...]]:
    """Name → shape of every tensor a cell of this kind carries."""
    cell = CellType(cell)
    n, m, q = n_inputs, n_hidden, n_outputs
    shapes: dict[str, tuple[int, ...]] = {}
    if cell.base == "car":
        if not n == m == q:
            raise ShapeError(f"a bare CAR cell needs equal sizes, got N={n} M={m} Q={q}")
        shapes["Phi_h"] = (n, n)
        shapes["varsigma_h"] = (n,)
    else:
        gates = {"rnn": ("h",), "lstm": LSTM_GATES, "gru": GRU_GATES}[cell.base]
        for g in gates:
            shapes[f"W_{g}"] = (m, n)
        for g in gates:
            shapes[f"U_{g}"] = (m, m)
        if cell.base == "lstm":
            for name in PEEPHOLES:
                shapes[name] = (m,)
        for g in gates:
            shapes[f"b_{g}"] = (m,)
        shapes["Phi_h"] = (m, m)
        shapes["varsigma_h"] = (m,)
        if cell.base == "lstm":
            shapes["Phi_c"] = (m, m)
            shapes["varsigma_c"] = (m,)
        shapes["W_y"] = (q, m)
        shapes["b_y"] = (q,)
    shapes["varphi"] = (n,)
    shapes["zeta"] = (n,)
    return shapes


@dataclass
class CellParams:
    """All tensors of one model, keyed by symbol name, plus its fixed settings."""

    cell: CellType
    tau: float
    tensors: dict[str, np.ndarray]
    hidden_activation: Activation = Activation.identity
    gate_activation: Activation = Activation.sigmoid
    input_activation: Activation = Activation.tanh
    peepholes: bool = True
    impute: bool = True
    n_hidden: int = field(init=False)

    def __post_init__(self):
        self.cell = CellType(self.cell)
        self.hidden_activation = Activation(self.hidden_activation)
        self.gate_activation = Activation(self.gate_activation)
        self.input_activation = Activation(self.input_activation)
        n = self.tensors["varphi"].shape[0]
        m = self.tensors["varsigma_h"].shape[0]
        q = self.tensors["b_y"].shape[0] if "b_y" in self.tensors else m
        expected = param_shapes(self.cell, n, m, q)
        if set(expected) != set(self.tensors):
            raise ShapeError(
                f"{self.cell.value} tensors {sorted(self.tensors)} != {sorted(expected)}"
            )
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise ShapeError(f"{name} must be {shape}, got {self.tensors[name].shape}")
        self.n_hidden = m

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    @property
    def n_inputs(self) -> int:
        return self.tensors["varphi"].shape[0]

    @property
    def n_outputs(self) -> int:
        return self.tensors["b_y"].shape[0] if "b_y" in self.tensors else self.n_hidden

    @property
    def dtype(self):
        return self.tensors["varsigma_h"].dtype

    def trainable_names(self) -> list[str]:
        """Tensors the optimizer updates; the rest stay frozen."""
        names = []
        for name in self.tensors:
            if name.startswith(("Phi_", "varsigma_")) and not self.cell.has_car:
                continue
            if name in PEEPHOLES and not self.peepholes:
                continue
            if name in ("varphi", "zeta") and not self.impute:
                continue
            names.append(name)
        return names

    def copy(self) -> "CellParams":
        return self.replace_tensors({k: v.copy() for k, v in self.tensors.items()})

    def astype(self, dtype) -> "CellParams":
        return self.replace_tensors({k: v.astype(dtype) for k, v in self.tensors.items()})

    def replace_tensors(self, tensors: dict[str, np.ndarray]) -> "CellParams":
        return CellParams(
            cell=self.cell,
            tau=self.tau,
            tensors=tensors,
            hidden_activation=self.hidden_activation,
            gate_activation=self.gate_activation,
            input_activation=self.input_activation,
            peepholes=self.peepholes,
            impute=self.impute,
        )

    @property
    def car_h(self) -> CarLayer:
        return CarLayer(self.tensors["Phi_h"], self.tensors["varsigma_h"], self.tau)

    @property
    def car_c(self) -> CarLayer:
        return CarLayer(self.tensors["Phi_c"], self.tensors["varsigma_c"], self.tau)

    @property
    def imputer(self) -> UnivariateImputer:
        return UnivariateImputer(self.tensors["varphi"], self.tensors["zeta"])


def zero_params(
    cell: CellType,
    n_inputs: int,
    n_hidden: int,
    n_outputs: int,
    tau: float,
    **settings,
) -> CellParams:
    """A model with every tensor zero."""
    shapes = param_shapes(cell, n_inputs, n_hidden, n_outputs)
    return CellParams(
        cell=cell,
        tau=tau,
        tensors={name: np.zeros(shape) for name, shape in shapes.items()},
        **settings,
    )


def _affine(p: CellParams, gate: str, x: Vector, h_prev: Vector) -> Vector:
    return matvec(p[f"W_{gate}"], x) + matvec(p[f"U_{gate}"], h_prev) + p[f"b_{gate}"]


def rnn_step(p: CellParams, x: Vector, h_prev: Vector, delta_t, step: int | None = None):
    """h̃ = σ_h(W_h x + U_h h_prev + b_h); h = CAR_h(h̃)."""
    hbar = _affine(p, "h", x, h_prev)
    htilde = activate(p.hidden_activation, hbar)
    h = car_correct(p.car_h, htilde, delta_t, "hidden state", step)
    entry = {"x": x, "h_prev": h_prev, "hbar": hbar, "htilde": htilde, "h": h}
    return h, entry


def lstm_step(
    p: CellParams,
    x: Vector,
    h_prev: Vector,
    c_prev: Vector,
    delta_t,
    step: int | None = None,
):
    """Peephole LSTM step with CAR corrections on both the cell and the hidden state.

    The forget and input gates peep at c_prev; the output gate peeps at the
    corrected cell c. The cell correction acts on the pre-activation cell.
    """
    sg, sc, sh = p.gate_activation, p.input_activation, p.hidden_activation
    fbar = _affine(p, "f", x, h_prev) + p["V_f"] * c_prev
    ibar = _affine(p, "i", x, h_prev) + p["V_i"] * c_prev
    zbar = _affine(p, "z", x, h_prev)
    f, i, z = activate(sg, fbar), activate(sg, ibar), activate(sc, zbar)
    cbar = hadamard(f, c_prev) + hadamard(i, z)
    c = car_correct(p.car_c, cbar, delta_t, "cell state", step)
    ctilde = activate(sh, cbar)
    obar = _affine(p, "o", x, h_prev) + p["V_o"] * c
    o = activate(sg, obar)
    htilde = hadamard(o, ctilde)
    h = car_correct(p.car_h, htilde, delta_t, "hidden state", step)
    entry = {
        "x": x, "h_prev": h_prev, "c_prev": c_prev,
        "fbar": fbar, "f": f, "ibar": ibar, "i": i, "zbar": zbar, "z": z,
        "cbar": cbar, "c": c, "ctilde": ctilde, "obar": obar, "o": o,
        "htilde": htilde, "h": h,
    }
    return h, c, entry


def gru_step(p: CellParams, x: Vector, h_prev: Vector, delta_t, step: int | None = None):
    """h̃ = (1 − z)⊙c̃ + z⊙h_prev with c̃ = σ_h(W_c x + U_c(r⊙h_prev) + b_c); h = CAR_h(h̃)."""
    sg = p.gate_activation
    zbar = _affine(p, "z", x, h_prev)
    rbar = _affine(p, "r", x, h_prev)
    z, r = activate(sg, zbar), activate(sg, rbar)
    cbar = matvec(p["W_c"], x) + matvec(p["U_c"], hadamard(r, h_prev)) + p["b_c"]
    ctilde = activate(p.hidden_activation, cbar)
    htilde = hadamard(1.0 - z, ctilde) + hadamard(z, h_prev)
    h = car_correct(p.car_h, htilde, delta_t, "hidden state", step)
    entry = {
        "x": x, "h_prev": h_prev, "zbar": zbar, "z": z, "rbar": rbar, "r": r,
        "cbar": cbar, "ctilde": ctilde, "htilde": htilde, "h": h,
    }
    return h, entry


def output_layer(p: CellParams, h: Vector) -> Vector:
    """Regression output y = W_y h + b_y (identity output activation)."""
    if p.cell.base == "car":
        return h
    return matvec(p["W_y"], h) + p["b_y"]


def initial_state(p: CellParams, batch_shape: tuple[int, ...]) -> tuple[np.ndarray, ...]:
    """Zero hidden (and cell) state."""
    if p.cell.base == "car":
        return ()
    h0 = np.zeros(batch_shape + (p.n_hidden,), dtype=p.dtype)
    if p.cell.base == "lstm":
        return h0, h0.copy()
    return (h0,)


def cell_step(
    p: CellParams,
    x: Vector,
    state: tuple[np.ndarray, ...],
    delta_t,
    step: int | None = None,
):
    """One step of any cell kind: returns (y, new state, cache entry)."""
    base = p.cell.base
    if base == "car":
        y = car_correct(p.car_h, x, delta_t, "output", step)
        return y, (), {"x": x}
    if base == "rnn":
        h, entry = rnn_step(p, x, state[0], delta_t, step)
        new_state = (h,)
    elif base == "lstm":
        h, c, entry = lstm_step(p, x, state[0], state[1], delta_t, step)
        new_state = (h, c)
    else:
        h, entry = gru_step(p, x, state[0], delta_t, step)
        new_state = (h,)
    return output_layer(p, h), new_state, entry


@dataclass
class ForwardCache:
    """Per-step cache entries of one forward pass, in step order."""

    cell: CellType
    steps: list[dict[str, np.ndarray]]
    delta_t: np.ndarray
    final_state: tuple[np.ndarray, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)


def forward_sequence(
    p: CellParams,
    inputs: np.ndarray,
    delta_t: np.ndarray,
    state: tuple[np.ndarray, ...] | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Roll the cell over a (batch of) input sequences.

    `inputs` is K×N or B×K×N; `delta_t` is K or B×K, the gap each step's
    correction uses. Returns outputs shaped like `inputs` with Q columns.
    """
    if inputs.shape[-1] != p.n_inputs:
        raise ShapeError(f"model expects {p.n_inputs} inputs, got {inputs.shape[-1]}")
    if delta_t.shape != inputs.shape[:-1]:
        raise ShapeError(f"delta_t {delta_t.shape} does not match inputs {inputs.shape}")
    xs = np.moveaxis(inputs, -2, 0)
    dts = np.moveaxis(delta_t, -1, 0)
    if state is None:
        state = initial_state(p, inputs.shape[:-2])
    outputs, steps = [], []
    for k in range(xs.shape[0]):
        y, state, entry = cell_step(p, xs[k], state, dts[k], step=k)
        outputs.append(y)
        steps.append(entry)
    y_all = np.moveaxis(np.stack(outputs), 0, -2)
    return y_all, ForwardCache(p.cell, steps, dts, state)
