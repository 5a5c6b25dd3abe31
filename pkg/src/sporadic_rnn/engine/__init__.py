"""Numerical core: kernels, CAR layers, cells and backpropagation through time."""

from sporadic_rnn.engine.batch import Example, SequenceBatch
from sporadic_rnn.engine.bptt import (
    GradientSet,
    NoSupervisionError,
    backward_sequence,
    finite_difference,
    loss_and_gradients,
    loss_and_output_grad,
    model_inputs,
    richardson_difference,
    scale_inputs,
    sequence_loss,
)
from sporadic_rnn.engine.car import CarLayer, UnivariateImputer, car_correct, transition_matrix
from sporadic_rnn.engine.cells import CellParams, ForwardCache, forward_sequence, param_shapes
from sporadic_rnn.engine.numerics import Activation, NonFiniteError, ShapeError

__all__ = [
    # Kernels
    "Activation",
    "NonFiniteError",
    "ShapeError",
    # CAR
    "CarLayer",
    "UnivariateImputer",
    "car_correct",
    "transition_matrix",
    # Cells
    "CellParams",
    "ForwardCache",
    "forward_sequence",
    "param_shapes",
    # Batches
    "Example",
    "SequenceBatch",
    # BPTT
    "GradientSet",
    "NoSupervisionError",
    "backward_sequence",
    "finite_difference",
    "loss_and_gradients",
    "loss_and_output_grad",
    "model_inputs",
    "richardson_difference",
    "scale_inputs",
    "sequence_loss",
]
