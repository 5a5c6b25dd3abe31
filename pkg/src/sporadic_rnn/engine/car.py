"""Continuous-time autoregressive correction layer and univariate CAR(1) imputer."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from sporadic_rnn.engine.numerics import (
    Matrix,
    ShapeError,
    Vector,
    check_finite,
    matvec,
)

log = logging.getLogger(__name__)


@dataclass
class CarLayer:
    """Affine drift correction [I + (Δt−τ)Φ]·v + (Δt−τ)ς.

    `phi` is M×M, `sigma` has length M and `tau` is the nominal step width.
    """

    phi: Matrix
    sigma: Vector
    tau: float

    def __post_init__(self):
        m = self.sigma.shape[0]
        if self.phi.shape != (m, m):
            raise ShapeError(f"CAR drift must be {m}x{m}, got {self.phi.shape}")

    @property
    def size(self) -> int:
        return self.sigma.shape[0]


def _offsets(layer: CarLayer, delta_t) -> np.ndarray:
    """Δt − τ, shaped to broadcast against a (batch of) vectors."""
    d = np.asarray(delta_t) - layer.tau
    if np.ndim(d) == 0:
        return d
    return d[:, None]


def car_correct(
    layer: CarLayer,
    v_tilde: Vector,
    delta_t,
    what: str = "CAR correction",
    step: int | None = None,
) -> Vector:
    """Apply the CAR correction to a regularized state.

    `delta_t` is a scalar for a single vector, or one gap per row for a batch.
    `what` and `step` label the NonFiniteError raised on overflow.
    """
    if v_tilde.shape[-1] != layer.size:
        raise ShapeError(f"CAR layer of size {layer.size} got vector {v_tilde.shape}")
    if np.any(np.asarray(delta_t) <= 0):
        raise ValueError("time gaps must be positive")
    d = _offsets(layer, delta_t)
    out = v_tilde + d * matvec(layer.phi, v_tilde) + d * layer.sigma
    return check_finite(out, what, step)


def car_correct_backward(
    layer: CarLayer,
    v_tilde: Vector,
    delta_t,
    d_out: Vector,
) -> tuple[Vector, Matrix, Vector]:
    """Gradients of car_correct w.r.t. its input, Φ and ς.

    Batched inputs sum the Φ and ς gradients over rows.
    """
    if d_out.shape != v_tilde.shape:
        raise ShapeError(f"gradient {d_out.shape} does not match input {v_tilde.shape}")
    d = _offsets(layer, delta_t)
    d_v_tilde = d_out + d * (d_out @ layer.phi)
    scaled = d * d_out
    if scaled.ndim == 1:
        return d_v_tilde, np.outer(scaled, v_tilde), scaled
    return d_v_tilde, scaled.T @ v_tilde, scaled.sum(axis=0)


def transition_matrix(phi: Matrix, delta_t: float, order: int) -> Matrix:
    """Truncated power series Σ_{p≤order} (ΦΔt)^p / p! of the matrix exponential."""
    if order < 1:
        raise ValueError("series order must be at least 1")
    a = phi * delta_t
    term = np.eye(phi.shape[0], dtype=np.result_type(phi, float))
    total = term.copy()
    for p in range(1, order + 1):
        term = term @ a / p
        total = total + term
    return total


@dataclass
class UnivariateImputer:
    """Per-feature CAR(1) parameters used to adjust carried-over values."""

    phi_diag: Vector
    zeta: Vector

    def __post_init__(self):
        if self.phi_diag.shape != self.zeta.shape:
            raise ShapeError("imputer parameters must have equal length")
        check_finite(self.phi_diag, "imputer drift")
        check_finite(self.zeta, "imputer bias")


def impute_univariate(
    imp: UnivariateImputer,
    feature: int,
    value_at_tj: float,
    t_j: float,
    t_k: float,
) -> float:
    """Carry the value observed at t_j over to t_k with the univariate drift.

    A negative gap (t_j after t_k) is the nearest-later fallback for leading
    missing values.
    """
    gap = t_k - t_j
    return (1.0 + gap * float(imp.phi_diag[feature])) * value_at_tj + gap * float(
        imp.zeta[feature]
    )


def locate_sources(
    mask: np.ndarray,
    times: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Find the observation each missing cell of one sequence is carried from.

    `mask` is K×N (1 = observed) and `times` the K representative timestamps.
    Returns (source_row, gap, imputable) arrays of shape K×N. A missing cell is
    carried from the most recent earlier observation of its feature; leading
    missing cells use the nearest later one with a negative gap. Features never
    observed stay non-imputable.
    """
    k_len, n_feat = mask.shape
    source = np.zeros((k_len, n_feat), dtype=int)
    gap = np.zeros((k_len, n_feat))
    imputable = np.zeros((k_len, n_feat), dtype=bool)
    observed = mask.astype(bool)
    for n in range(n_feat):
        rows = np.flatnonzero(observed[:, n])
        if rows.size == 0:
            continue
        for k in np.flatnonzero(~observed[:, n]):
            earlier = rows[rows < k]
            j = earlier[-1] if earlier.size else rows[0]
            source[k, n] = j
            gap[k, n] = times[k] - times[j]
            imputable[k, n] = True
    return source, gap, imputable


def impute_inputs(
    imp: UnivariateImputer,
    values: np.ndarray,
    source_values: np.ndarray,
    gaps: np.ndarray,
    imputable: np.ndarray,
) -> np.ndarray:
    """Vectorized impute_univariate over a (batch of) input arrays.

    Observed cells keep `values`; imputable cells get the carried value.
    """
    carried = (1.0 + gaps * imp.phi_diag) * source_values + gaps * imp.zeta
    return np.where(imputable, carried, values)


def impute_backward(
    source_values: np.ndarray,
    gaps: np.ndarray,
    imputable: np.ndarray,
    d_inputs: np.ndarray,
) -> tuple[Vector, Vector]:
    """Gradients of imputed inputs w.r.t. the imputer's φ and ζ.

    The source observation is treated as a constant.
    """
    g = np.where(imputable, d_inputs * gaps, 0.0)
    axes = tuple(range(g.ndim - 1))
    return (g * source_values).sum(axis=axes), g.sum(axis=axes)


def tau_in_range(tau: float, gaps: np.ndarray) -> bool:
    """Check τ against the observed gap range, warning when it falls outside."""
    lo, hi = float(np.min(gaps)), float(np.max(gaps))
    if not (lo - 1e-12 <= tau <= hi + 1e-12) or math.isnan(tau):
        log.warning(f"tau={tau:.4g} outside observed gap range [{lo:.4g}, {hi:.4g}]")
        return False
    return True
