"""Adam with decoupled weight decay and optional global-norm clipping."""

import logging
from dataclasses import dataclass, field

import numpy as np

from sporadic_rnn.engine.bptt import GradientSet
from sporadic_rnn.engine.cells import CellParams
from sporadic_rnn.engine.numerics import check_finite
from sporadic_rnn.models.config import TrainConfig

log = logging.getLogger(__name__)

DECAYED_PREFIXES = ("W_", "U_", "V_", "Phi_")


@dataclass
class AdamState:
    """First and second moments per trainable tensor, and the step count."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, p: CellParams) -> "AdamState":
        names = p.trainable_names()
        return cls(
            m={n: np.zeros_like(p[n]) for n in names},
            v={n: np.zeros_like(p[n]) for n in names},
        )


def clip_gradients(grads: GradientSet, names: list[str], max_norm: float) -> GradientSet:
    """Rescale so the global L2 norm over `names` is at most `max_norm`."""
    norm = grads.global_norm(names)
    if norm > max_norm:
        log.debug(f"Clipping gradient norm {norm:.4g} to {max_norm:.4g}")
        return grads.scaled(max_norm / norm)
    return grads


def adam_step(
    p: CellParams,
    grads: GradientSet,
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[CellParams, AdamState]:
    """One bias-corrected Adam update of every trainable tensor.

    θ ← θ − lr·(m̂/(√v̂ + ε) + wd·θ), with weight decay on W, U, V and Φ only.
    """
    names = p.trainable_names()
    if cfg.clip_norm is not None:
        grads = clip_gradients(grads, names, cfg.clip_norm)
    t = state.step + 1
    b1, b2 = cfg.beta1, cfg.beta2
    new_tensors = dict(p.tensors)
    m, v = dict(state.m), dict(state.v)
    for name in names:
        g = grads[name]
        m[name] = b1 * state.m[name] + (1 - b1) * g
        v[name] = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = m[name] / (1 - b1**t)
        v_hat = v[name] / (1 - b2**t)
        update = m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        if name.startswith(DECAYED_PREFIXES):
            update = update + cfg.weight_decay * p[name]
        new_tensors[name] = check_finite(p[name] - cfg.learning_rate * update, f"update of {name}")
    return p.replace_tensors(new_tensors), AdamState(m=m, v=v, step=t)
