"""Dense linear algebra and activation kernels shared by every layer.

Vectors are 1-D float arrays; a batch of vectors is a 2-D array with one vector
per row. All kernels accept either form and keep the input dtype so the same
code runs in float64 and in extended precision.
"""

from enum import Enum

import numpy as np
import numpy.typing as npt

Matrix = npt.NDArray[np.floating]
Vector = npt.NDArray[np.floating]


class ShapeError(ValueError):
    """Operand dimensions do not line up."""


class NonFiniteError(FloatingPointError):
    """A kernel produced NaN or Inf."""

    def __init__(self, what: str, step: int | None = None):
        self.what = what
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite {what}{where}")


class Activation(str, Enum):
    """Elementwise activation functions."""

    identity = "identity"
    tanh = "tanh"
    sigmoid = "sigmoid"


def _sigmoid(v: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def matvec(a: Matrix, v: Vector) -> Vector:
    """Matrix-vector product A·v, row-wise for a batch of vectors."""
    if a.ndim != 2 or v.shape[-1] != a.shape[1]:
        raise ShapeError(f"matvec: matrix {a.shape} cannot multiply vector {v.shape}")
    return v @ a.T


def hadamard(u: Vector, v: Vector) -> Vector:
    """Elementwise product u ⊙ v."""
    if u.shape != v.shape:
        raise ShapeError(f"hadamard: shapes {u.shape} and {v.shape} differ")
    return u * v


def activate(kind: Activation | str, v: Vector) -> Vector:
    """Apply an activation elementwise."""
    kind = Activation(kind)
    if kind is Activation.identity:
        return v.copy()
    if kind is Activation.tanh:
        return np.tanh(v)
    return _sigmoid(v)


def activate_deriv(kind: Activation | str, pre_activation: Vector) -> Vector:
    """Derivative of an activation, evaluated at the pre-activation value."""
    kind = Activation(kind)
    if kind is Activation.identity:
        return np.ones_like(pre_activation)
    if kind is Activation.tanh:
        t = np.tanh(pre_activation)
        return 1.0 - t * t
    s = _sigmoid(pre_activation)
    return s * (1.0 - s)


def check_finite(arr: np.ndarray, what: str, step: int | None = None) -> np.ndarray:
    """Return `arr` unchanged, raising NonFiniteError if any entry is NaN/Inf."""
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(what, step)
    return arr
