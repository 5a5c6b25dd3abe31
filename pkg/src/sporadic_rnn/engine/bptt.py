"""Backpropagation through time for every cell kind, the masked loss, and
finite-difference gradient oracles.

All kernels work on a single sequence (K×· arrays) or a batch (B×K×·). Losses and
gradients of a batch are the sums of the per-sequence values.
"""

import logging
from dataclasses import dataclass

import numpy as np

from sporadic_rnn.engine.batch import SequenceBatch
from sporadic_rnn.engine.car import car_correct_backward, impute_backward, impute_inputs
from sporadic_rnn.engine.cells import (
    GRU_GATES,
    LSTM_GATES,
    CellParams,
    ForwardCache,
    forward_sequence,
)
from sporadic_rnn.engine.numerics import ShapeError, activate_deriv, check_finite

log = logging.getLogger(__name__)


class NoSupervisionError(ValueError):
    """A sequence has no available target at any step."""


@dataclass
class GradientSet:
    """Partial derivatives keyed like CellParams.tensors.

    `d_inputs` is the gradient w.r.t. the (scaled) network inputs.
    """

    tensors: dict[str, np.ndarray]
    d_inputs: np.ndarray | None = None

    @classmethod
    def zeros_like(cls, p: CellParams) -> "GradientSet":
        return cls({k: np.zeros_like(v) for k, v in p.tensors.items()})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __iadd__(self, other: "GradientSet") -> "GradientSet":
        for k, v in other.tensors.items():
            self.tensors[k] = self.tensors[k] + v
        return self

    def scaled(self, factor: float) -> "GradientSet":
        return GradientSet({k: v * factor for k, v in self.tensors.items()}, self.d_inputs)

    def global_norm(self, names: list[str] | None = None) -> float:
        names = names if names is not None else list(self.tensors)
        return float(np.sqrt(sum(np.sum(self.tensors[n] ** 2) for n in names)))

    def freeze(self, trainable: list[str]) -> "GradientSet":
        """Zero the gradients of frozen tensors."""
        for k in self.tensors:
            if k not in trainable:
                self.tensors[k] = np.zeros_like(self.tensors[k])
        return self


def _outer(delta: np.ndarray, v: np.ndarray) -> np.ndarray:
    """δ vᵀ, summed over batch rows."""
    if delta.ndim == 1:
        return np.outer(delta, v)
    return delta.T @ v


def _rows(delta: np.ndarray) -> np.ndarray:
    return delta if delta.ndim == 1 else delta.sum(axis=0)


def scale_inputs(values: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Zero missing inputs and scale the rest by (#available / N).

    Returns the scaled inputs and the per-row scale factor (shape ...×1).
    """
    if values.shape != mask.shape:
        raise ShapeError(f"inputs {values.shape} and mask {mask.shape} differ")
    ratio = mask.sum(axis=-1, keepdims=True) / mask.shape[-1]
    return np.where(mask > 0, values, 0.0) * ratio, ratio


def loss_and_output_grad(
    y: np.ndarray,
    s: np.ndarray,
    target_mask: np.ndarray,
    lengths: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Masked squared error and its gradient w.r.t. the outputs.

    Each sequence contributes (1/(K·Q)) Σ_k (Q/a_k) Σ_{available} (y − s)², with
    a_k the available targets at step k and K its unpadded length. The gradient
    of an available cell is (2/(K·Q))·(Q/a_k)·(y − s); missing cells get 0.
    """
    if y.shape != s.shape or y.shape != target_mask.shape:
        raise ShapeError(f"outputs {y.shape}, targets {s.shape}, mask {target_mask.shape}")
    q = y.shape[-1]
    if lengths is None:
        lengths = np.full(y.shape[:-2], y.shape[-2])
    avail = target_mask.sum(axis=-1, keepdims=True)
    if np.any(avail.sum(axis=(-2, -1)) == 0):
        raise NoSupervisionError("no supervision: every target is missing")
    k_len = np.asarray(lengths, dtype=y.dtype)[..., None, None]
    weight = np.where(avail > 0, q / np.maximum(avail, 1), 0.0) / (k_len * q)
    resid = np.where(target_mask > 0, y - s, 0.0)
    loss = np.sum(weight * resid * resid)
    return loss, 2.0 * weight * resid


def model_inputs(p: CellParams, batch: SequenceBatch):
    """Impute, mask and scale a batch's inputs for the network.

    Returns (scaled inputs, availability mask, scale ratio).
    """
    if p.impute:
        filled = impute_inputs(
            p.imputer, batch.inputs, batch.source_values, batch.gaps, batch.imputable
        )
        avail = np.where(batch.imputable, 1.0, batch.input_mask).astype(batch.inputs.dtype)
    else:
        filled, avail = batch.inputs, batch.input_mask
    scaled, ratio = scale_inputs(filled, avail)
    return scaled, avail, ratio


def backward_rnn(p: CellParams, cache: ForwardCache, d_ybar: np.ndarray) -> GradientSet:
    """BPTT through a CAR-RNN; `d_ybar` is K×Q (or B×K×Q)."""
    g = GradientSet.zeros_like(p)
    t = g.tensors
    dys = _steps(cache, d_ybar)
    sh = p.hidden_activation
    dh_rec = np.zeros_like(cache.steps[0]["h"])
    dx = []
    for k in reversed(range(len(cache))):
        e, dy = cache.steps[k], dys[k]
        t["W_y"] += _outer(dy, e["h"])
        t["b_y"] += _rows(dy)
        dh = dy @ p["W_y"] + dh_rec
        dhtilde, dphi, dsig = car_correct_backward(p.car_h, e["htilde"], cache.delta_t[k], dh)
        t["Phi_h"] += dphi
        t["varsigma_h"] += dsig
        dhbar = dhtilde * activate_deriv(sh, e["hbar"])
        t["W_h"] += _outer(dhbar, e["x"])
        t["U_h"] += _outer(dhbar, e["h_prev"])
        t["b_h"] += _rows(dhbar)
        dx.append(dhbar @ p["W_h"])
        dh_rec = dhbar @ p["U_h"]
    g.d_inputs = _stack_inputs(dx)
    return g


def backward_lstm(p: CellParams, cache: ForwardCache, d_ybar: np.ndarray) -> GradientSet:
    """BPTT through a peephole CAR-LSTM with corrections on h and c."""
    g = GradientSet.zeros_like(p)
    t = g.tensors
    dys = _steps(cache, d_ybar)
    sg, sc, sh = p.gate_activation, p.input_activation, p.hidden_activation
    dh_rec = np.zeros_like(cache.steps[0]["h"])
    dc_rec = np.zeros_like(dh_rec)
    dx = []
    for k in reversed(range(len(cache))):
        e, dy, dt = cache.steps[k], dys[k], cache.delta_t[k]
        t["W_y"] += _outer(dy, e["h"])
        t["b_y"] += _rows(dy)
        dh = dy @ p["W_y"] + dh_rec
        dhtilde, dphi, dsig = car_correct_backward(p.car_h, e["htilde"], dt, dh)
        t["Phi_h"] += dphi
        t["varsigma_h"] += dsig

        d = {}
        d["o"] = dhtilde * e["ctilde"] * activate_deriv(sg, e["obar"])
        dctilde = dhtilde * e["o"]
        dc = dc_rec + p["V_o"] * d["o"]
        dcbar, dphi_c, dsig_c = car_correct_backward(p.car_c, e["cbar"], dt, dc)
        t["Phi_c"] += dphi_c
        t["varsigma_c"] += dsig_c
        dcbar = dcbar + dctilde * activate_deriv(sh, e["cbar"])
        d["z"] = dcbar * e["i"] * activate_deriv(sc, e["zbar"])
        d["i"] = dcbar * e["z"] * activate_deriv(sg, e["ibar"])
        d["f"] = dcbar * e["c_prev"] * activate_deriv(sg, e["fbar"])

        t["V_f"] += _rows(d["f"] * e["c_prev"])
        t["V_i"] += _rows(d["i"] * e["c_prev"])
        t["V_o"] += _rows(d["o"] * e["c"])
        dx_k = np.zeros_like(e["x"])
        dh_rec = np.zeros_like(dh)
        for gate in LSTM_GATES:
            t[f"W_{gate}"] += _outer(d[gate], e["x"])
            t[f"U_{gate}"] += _outer(d[gate], e["h_prev"])
            t[f"b_{gate}"] += _rows(d[gate])
            dx_k = dx_k + d[gate] @ p[f"W_{gate}"]
            dh_rec = dh_rec + d[gate] @ p[f"U_{gate}"]
        dx.append(dx_k)
        dc_rec = p["V_f"] * d["f"] + p["V_i"] * d["i"] + dcbar * e["f"]
    if not p.peepholes:
        for name in ("V_f", "V_i", "V_o"):
            t[name] = np.zeros_like(t[name])
    g.d_inputs = _stack_inputs(dx)
    return g


def backward_gru(p: CellParams, cache: ForwardCache, d_ybar: np.ndarray) -> GradientSet:
    """BPTT through a CAR-GRU."""
    g = GradientSet.zeros_like(p)
    t = g.tensors
    dys = _steps(cache, d_ybar)
    sg, sh = p.gate_activation, p.hidden_activation
    dh_rec = np.zeros_like(cache.steps[0]["h"])
    dx = []
    for k in reversed(range(len(cache))):
        e, dy = cache.steps[k], dys[k]
        t["W_y"] += _outer(dy, e["h"])
        t["b_y"] += _rows(dy)
        dh = dy @ p["W_y"] + dh_rec
        dhtilde, dphi, dsig = car_correct_backward(p.car_h, e["htilde"], cache.delta_t[k], dh)
        t["Phi_h"] += dphi
        t["varsigma_h"] += dsig

        h_prev, z, r = e["h_prev"], e["z"], e["r"]
        d = {}
        d["c"] = dhtilde * (1.0 - z) * activate_deriv(sh, e["cbar"])
        d["z"] = dhtilde * (h_prev - e["ctilde"]) * activate_deriv(sg, e["zbar"])
        d_rh = d["c"] @ p["U_c"]
        d["r"] = d_rh * h_prev * activate_deriv(sg, e["rbar"])

        t["U_c"] += _outer(d["c"], r * h_prev)
        t["U_z"] += _outer(d["z"], h_prev)
        t["U_r"] += _outer(d["r"], h_prev)
        dx_k = np.zeros_like(e["x"])
        for gate in GRU_GATES:
            t[f"W_{gate}"] += _outer(d[gate], e["x"])
            t[f"b_{gate}"] += _rows(d[gate])
            dx_k = dx_k + d[gate] @ p[f"W_{gate}"]
        dx.append(dx_k)
        dh_rec = d["z"] @ p["U_z"] + d["r"] @ p["U_r"] + dhtilde * z + d_rh * r
    g.d_inputs = _stack_inputs(dx)
    return g


def backward_car(p: CellParams, cache: ForwardCache, d_ybar: np.ndarray) -> GradientSet:
    """Gradients of the bare CAR regressor y_k = CAR(x_k)."""
    g = GradientSet.zeros_like(p)
    dys = _steps(cache, d_ybar)
    dx = []
    for k in reversed(range(len(cache))):
        dxk, dphi, dsig = car_correct_backward(
            p.car_h, cache.steps[k]["x"], cache.delta_t[k], dys[k]
        )
        g.tensors["Phi_h"] += dphi
        g.tensors["varsigma_h"] += dsig
        dx.append(dxk)
    g.d_inputs = _stack_inputs(dx)
    return g


BACKWARD = {
    "rnn": backward_rnn,
    "lstm": backward_lstm,
    "gru": backward_gru,
    "car": backward_car,
}


def _steps(cache: ForwardCache, d_ybar: np.ndarray) -> np.ndarray:
    if d_ybar.shape[-2] != len(cache):
        raise ShapeError(f"gradient has {d_ybar.shape[-2]} steps, cache has {len(cache)}")
    return np.moveaxis(d_ybar, -2, 0)


def _stack_inputs(dx_reversed: list[np.ndarray]) -> np.ndarray:
    return np.moveaxis(np.stack(dx_reversed[::-1]), 0, -2)


def backward_sequence(p: CellParams, cache: ForwardCache, d_ybar: np.ndarray) -> GradientSet:
    """Dispatch to the backward pass of the cache's cell kind."""
    if cache.cell is not p.cell:
        raise ShapeError(f"cache from a {cache.cell.value} cell, params are {p.cell.value}")
    return BACKWARD[p.cell.base](p, cache, d_ybar)


def sequence_loss(p: CellParams, batch: SequenceBatch):
    """Summed masked loss of a batch, in the parameters' dtype."""
    x, _, _ = model_inputs(p, batch)
    y, _ = forward_sequence(p, x, batch.delta_t)
    loss, _ = loss_and_output_grad(y, batch.targets, batch.target_mask, batch.lengths)
    return loss


def loss_and_gradients(p: CellParams, batch: SequenceBatch) -> tuple[float, GradientSet]:
    """Summed loss and summed gradients of a batch; frozen tensors get zero gradient."""
    x, avail, ratio = model_inputs(p, batch)
    y, cache = forward_sequence(p, x, batch.delta_t)
    loss, d_y = loss_and_output_grad(y, batch.targets, batch.target_mask, batch.lengths)
    grads = backward_sequence(p, cache, d_y)
    if p.impute:
        d_filled = grads.d_inputs * avail * ratio
        dphi, dzeta = impute_backward(batch.source_values, batch.gaps, batch.imputable, d_filled)
        grads.tensors["varphi"] = grads.tensors["varphi"] + dphi
        grads.tensors["zeta"] = grads.tensors["zeta"] + dzeta
    grads.freeze(p.trainable_names())
    for name, v in grads.tensors.items():
        check_finite(v, f"gradient of {name}")
    return float(loss), grads


def _perturbed_loss(p: CellParams, batch: SequenceBatch, name: str, index, delta):
    q = p.copy()
    q.tensors[name][index] += delta
    return sequence_loss(q, batch)


def finite_difference(
    p: CellParams,
    batch: SequenceBatch,
    name: str,
    index: tuple[int, ...],
    h: float | None = None,
) -> float:
    """Central difference (L(θ+h) − L(θ−h)) / 2h of the masked loss in one coordinate."""
    theta = p.tensors[name][index]
    if h is None:
        h = 1e-5 * max(1.0, abs(float(theta)))
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    up = _perturbed_loss(p, batch, name, index, h)
    down = _perturbed_loss(p, batch, name, index, -h)
    return float((up - down) / (2 * h))


def richardson_difference(
    p: CellParams,
    batch: SequenceBatch,
    name: str,
    index: tuple[int, ...],
    h: float | None = None,
    dtype=np.longdouble,
) -> float:
    """Fourth-order derivative estimate (4·D(h/2) − D(h)) / 3 evaluated in `dtype`."""
    pe, be = p.astype(dtype), batch.astype(dtype)
    theta = pe.tensors[name][index]
    if h is None:
        h = 1e-4 * max(1.0, abs(float(theta)))
    h = dtype(h)

    def central(step):
        up = _perturbed_loss(pe, be, name, index, step)
        down = _perturbed_loss(pe, be, name, index, -step)
        return (up - down) / (2 * step)

    return float((4 * central(h / 2) - central(h)) / 3)
