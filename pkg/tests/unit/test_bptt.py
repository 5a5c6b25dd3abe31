"""Unit tests for the masked loss, input scaling and backpropagation through time."""

import numpy as np
import pytest

from sporadic_rnn.data.examples import make_example
from sporadic_rnn.engine.batch import SequenceBatch
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
)
from sporadic_rnn.engine.cells import CellParams, forward_sequence, param_shapes
from sporadic_rnn.engine.numerics import ShapeError
from sporadic_rnn.models.enums import CellType
from sporadic_rnn.pipeline.gradcheck import random_sequence


def random_params(cell, n=2, m=4, seed=0, **settings) -> CellParams:
    rng = np.random.default_rng(seed)
    m = n if CellType(cell).base == "car" else m
    tensors = {
        name: rng.normal(0.0, 0.5, size=shape)
        for name, shape in param_shapes(CellType(cell), n, m, n).items()
    }
    return CellParams(cell=cell, tau=1.0, tensors=tensors, **settings)


def random_batch(lengths=(5, 4), n=2, seed=0) -> SequenceBatch:
    rng = np.random.default_rng(seed)
    seqs = [random_sequence(f"s{i}", k + 1, n, rng) for i, k in enumerate(lengths)]
    return SequenceBatch.from_examples([make_example(s) for s in seqs], tau=1.0)


class TestScaleInputs:
    """Tests for scale_inputs."""

    def test_one_missing_of_three(self):
        """One of three missing scales the rest by 2/3."""
        scaled, ratio = scale_inputs(np.array([3.0, 7.0, 6.0]), np.array([1.0, 0.0, 1.0]))
        np.testing.assert_allclose(scaled, [2.0, 0.0, 4.0])
        assert ratio[0] == pytest.approx(2 / 3)

    def test_full_mask_unchanged(self):
        """A full mask leaves inputs unchanged."""
        x = np.array([1.0, -2.0])
        scaled, _ = scale_inputs(x, np.ones(2))
        np.testing.assert_array_equal(scaled, x)

    def test_empty_mask_zero(self):
        """An empty mask gives the zero vector."""
        scaled, _ = scale_inputs(np.array([np.nan, 5.0]), np.zeros(2))
        assert not scaled.any()

    def test_shape_mismatch(self):
        """Values and mask must share a shape."""
        with pytest.raises(ShapeError):
            scale_inputs(np.ones(3), np.ones(2))


class TestLossAndOutputGrad:
    """Tests for loss_and_output_grad."""

    def test_perfect_prediction(self):
        """Y = S gives zero loss and zero gradient."""
        y = np.arange(6.0).reshape(3, 2)
        loss, dy = loss_and_output_grad(y, y.copy(), np.ones((3, 2)))
        assert loss == 0.0
        assert not dy.any()

    def test_scalar_case(self):
        """K=Q=1, y=1, s=0 → loss 1, dy = 2."""
        loss, dy = loss_and_output_grad(np.array([[1.0]]), np.array([[0.0]]), np.array([[1.0]]))
        assert loss == 1.0
        assert dy[0, 0] == 2.0

    def test_single_available_target_scaled_by_three(self):
        """Q=3 with one available target scales that gradient by 3/1."""
        y = np.array([[1.0, 5.0, 5.0]])
        s = np.zeros((1, 3))
        _, full = loss_and_output_grad(y, s, np.ones((1, 3)))
        _, partial = loss_and_output_grad(y, s, np.array([[1.0, 0.0, 0.0]]))
        assert partial[0, 0] == pytest.approx(3.0 * full[0, 0])
        assert partial[0, 1] == 0.0 and partial[0, 2] == 0.0

    def test_missing_targets_get_zero_gradient(self):
        """Rows of dY are exactly zero where the target is missing."""
        rng = np.random.default_rng(0)
        y, s = rng.normal(size=(2, 5, 3))
        mask = (rng.random((5, 3)) < 0.5).astype(float)
        mask[0, 0] = 1.0
        _, dy = loss_and_output_grad(y, s, mask)
        assert np.all(dy[mask == 0] == 0.0)

    def test_uniform_availability_fraction_form(self):
        """With a_k the same at every step, loss = Σ(y−s)² / (K·Q·fraction)."""
        rng = np.random.default_rng(1)
        y, s = rng.normal(size=(2, 4, 3))
        mask = np.tile([1.0, 1.0, 0.0], (4, 1))
        loss, _ = loss_and_output_grad(y, s, mask)
        expected = np.sum(((y - s) * mask) ** 2) / (4 * 3 * (2 / 3))
        assert loss == pytest.approx(expected, rel=1e-12)

    def test_no_supervision(self):
        """All targets missing is an error."""
        with pytest.raises(NoSupervisionError, match="no supervision"):
            loss_and_output_grad(np.ones((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))

    def test_padded_length_normalizes(self):
        """The K in 1/(KQ) is the unpadded length of each sequence."""
        y = np.ones((1, 4, 1))
        s = np.zeros((1, 4, 1))
        mask = np.array([[[1.0], [1.0], [0.0], [0.0]]])
        loss, _ = loss_and_output_grad(y, s, mask, lengths=np.array([2]))
        assert loss == pytest.approx(1.0)


class TestModelInputs:
    """Tests for model_inputs."""

    def test_zero_imputer_locf(self):
        """With φ = ζ = 0, imputed inputs are the carried values, scaled by availability."""
        p = random_params(CellType.car_gru)
        p.tensors["varphi"][:] = 0.0
        p.tensors["zeta"][:] = 0.0
        batch = random_batch()
        x, avail, ratio = model_inputs(p, batch)
        assert np.all(avail >= batch.input_mask)
        np.testing.assert_array_equal(ratio[..., 0], avail.sum(axis=-1) / 2)
        filled = np.where(batch.imputable, batch.source_values, batch.inputs)
        np.testing.assert_array_equal(x, np.where(avail > 0, filled, 0.0) * ratio)

    def test_without_imputation_masks_inputs(self):
        """Without imputation, missing inputs are zero and the rest scaled."""
        p = random_params(CellType.car_gru, impute=False)
        batch = random_batch()
        x, avail, ratio = model_inputs(p, batch)
        np.testing.assert_array_equal(avail, batch.input_mask)
        assert np.all(x[batch.input_mask == 0] == 0.0)


class TestGradientSet:
    """Tests for GradientSet."""

    def test_accumulate_and_norm(self):
        """In-place addition and the global norm."""
        p = random_params(CellType.car)
        g = GradientSet.zeros_like(p)
        g += GradientSet({k: np.ones_like(v) for k, v in p.tensors.items()})
        assert g.global_norm(["varsigma_h"]) == pytest.approx(np.sqrt(2))
        assert g.scaled(0.5)["Phi_h"][0, 0] == 0.5

    def test_freeze(self):
        """Frozen tensors get zero gradient."""
        p = random_params(CellType.car)
        g = GradientSet({k: np.ones_like(v) for k, v in p.tensors.items()})
        g.freeze(["Phi_h"])
        assert g["Phi_h"].all()
        assert not g["zeta"].any()


class TestBackward:
    """Tests for the backward passes."""

    @pytest.mark.parametrize("cell", ["car_rnn", "car_lstm", "car_gru", "car"])
    def test_zero_output_gradient(self, cell):
        """A zero upstream gradient gives all-zero parameter gradients."""
        p = random_params(cell)
        x = np.random.default_rng(2).normal(size=(4, 2))
        _, cache = forward_sequence(p, x, np.array([1.0, 0.5, 2.0, 1.3]))
        grads = backward_sequence(p, cache, np.zeros((4, 2)))
        assert all(not g.any() for g in grads.tensors.values())

    @pytest.mark.parametrize("cell", ["car_rnn", "car_lstm", "car_gru"])
    def test_nominal_gaps_zero_car_gradient(self, cell):
        """Δt = τ at every step gives zero Φ and ς gradients."""
        p = random_params(cell)
        rng = np.random.default_rng(3)
        _, cache = forward_sequence(p, rng.normal(size=(4, 2)), np.ones(4))
        grads = backward_sequence(p, cache, rng.normal(size=(4, 2)))
        for name in grads.tensors:
            if name.startswith(("Phi_", "varsigma_")):
                assert not grads[name].any()

    def test_peephole_gradients_zero_when_disabled(self):
        """Disabled peepholes get identically zero gradients."""
        p = random_params("car_lstm", peepholes=False)
        for name in ("V_f", "V_i", "V_o"):
            p.tensors[name][:] = 0.0
        _, grads = loss_and_gradients(p, random_batch())
        for name in ("V_f", "V_i", "V_o"):
            assert not grads[name].any()

    def test_single_step_gru(self):
        """A one-step GRU sequence has no recurrent weight gradient from h_0 = 0."""
        p = random_params("car_gru")
        _, cache = forward_sequence(p, np.array([[0.3, -0.7]]), np.array([1.4]))
        grads = backward_sequence(p, cache, np.array([[1.0, -1.0]]))
        for gate in ("z", "r", "c"):
            assert not grads[f"U_{gate}"].any()
        assert grads["W_c"].any()

    def test_cache_cell_mismatch(self):
        """A cache from another cell kind is rejected."""
        p = random_params("car_gru")
        _, cache = forward_sequence(p, np.ones((2, 2)), np.ones(2))
        other = random_params("car_rnn")
        with pytest.raises(ShapeError):
            backward_sequence(other, cache, np.zeros((2, 2)))


class TestLossAndGradients:
    """Tests for loss_and_gradients on padded batches."""

    @pytest.mark.parametrize("cell", ["car_rnn", "car_lstm", "car_gru", "car"])
    def test_batch_is_sum_of_sequences(self, cell):
        """Loss and gradients of a two-sequence batch are the per-sequence sums."""
        p = random_params(cell)
        batch = random_batch(lengths=(5, 3))
        loss, grads = loss_and_gradients(p, batch)
        parts = [loss_and_gradients(p, batch.select([b])) for b in range(2)]
        assert loss == pytest.approx(parts[0][0] + parts[1][0], rel=1e-12)
        for name in grads.tensors:
            np.testing.assert_allclose(
                grads[name], parts[0][1][name] + parts[1][1][name], rtol=1e-10, atol=1e-12
            )

    def test_padding_does_not_change_gradients(self):
        """A sequence padded inside a batch gets the same gradient as on its own."""
        p = random_params("car_lstm")
        rng = np.random.default_rng(4)
        short = make_example(random_sequence("a", 3, 2, rng))
        long = make_example(random_sequence("b", 6, 2, rng))
        alone = SequenceBatch.from_examples([short], tau=1.0)
        padded = SequenceBatch.from_examples([short, long], tau=1.0).select([0])
        assert padded.n_steps > alone.n_steps
        loss_a, g_a = loss_and_gradients(p, alone)
        loss_p, g_p = loss_and_gradients(p, padded)
        assert loss_a == pytest.approx(loss_p, rel=1e-12)
        for name in g_a.tensors:
            np.testing.assert_allclose(g_a[name], g_p[name], rtol=1e-10, atol=1e-12)

    def test_input_gradient_zero_at_missing_inputs(self):
        """Without imputation, masked inputs pass no gradient back."""
        p = random_params("car_gru", impute=False)
        batch = random_batch()
        x, avail, ratio = model_inputs(p, batch)
        y, cache = forward_sequence(p, x, batch.delta_t)
        _, d_y = loss_and_output_grad(y, batch.targets, batch.target_mask, batch.lengths)
        grads = backward_sequence(p, cache, d_y)
        d_raw = grads.d_inputs * avail * ratio
        assert np.all(d_raw[batch.input_mask == 0] == 0.0)

    def test_frozen_tensors_zero(self):
        """Plain cells and disabled imputation freeze CAR and imputer gradients."""
        p = random_params("gru", impute=False)
        _, grads = loss_and_gradients(p, random_batch())
        for name in ("Phi_h", "varsigma_h", "varphi", "zeta"):
            assert not grads[name].any()
        assert grads["W_z"].any()

    @pytest.mark.parametrize("cell", ["car_rnn", "car_lstm", "car_gru", "car"])
    def test_matches_central_difference(self, cell):
        """Sampled coordinates agree with plain float64 central differences."""
        p = random_params(cell, seed=5)
        batch = random_batch(seed=5)
        _, grads = loss_and_gradients(p, batch)
        rng = np.random.default_rng(6)
        for name in p.trainable_names():
            index = tuple(int(rng.integers(s)) for s in p[name].shape)
            numeric = finite_difference(p, batch, name, index)
            assert grads[name][index] == pytest.approx(numeric, rel=1e-5, abs=1e-8)


class TestFiniteDifferences:
    """Tests for the finite-difference oracles."""

    def test_linear_coordinate_exact(self):
        """ς of the bare CAR regressor enters linearly in each output."""
        p = random_params("car", seed=7)
        batch = random_batch(seed=7)
        _, grads = loss_and_gradients(p, batch)
        assert finite_difference(p, batch, "varsigma_h", (0,)) == pytest.approx(
            grads["varsigma_h"][0], rel=1e-7
        )

    def test_halving_step_reduces_error(self):
        """Halving h shrinks the central-difference error about fourfold."""
        p = random_params("car_rnn", seed=8, hidden_activation="tanh")
        batch = random_batch(seed=8)
        exact = richardson_difference(p, batch, "W_h", (0, 0))
        e1 = abs(finite_difference(p, batch, "W_h", (0, 0), h=1e-2) - exact)
        e2 = abs(finite_difference(p, batch, "W_h", (0, 0), h=5e-3) - exact)
        assert 2.5 < e1 / e2 < 5.5

    def test_rejects_non_positive_step(self):
        """The step must be positive."""
        p = random_params("car", seed=7)
        with pytest.raises(ValueError):
            finite_difference(p, random_batch(), "Phi_h", (0, 0), h=0.0)

    def test_richardson_leaves_params_untouched(self):
        """Perturbations are applied to copies."""
        p = random_params("car_gru", seed=9)
        before = p["U_c"].copy()
        richardson_difference(p, random_batch(), "U_c", (1, 2))
        np.testing.assert_array_equal(p["U_c"], before)
