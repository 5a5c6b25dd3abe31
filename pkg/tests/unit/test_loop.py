"""Unit tests for the training loop and metrics."""

from unittest.mock import patch

import numpy as np
import pytest

from sporadic_rnn.data.examples import build_batch
from sporadic_rnn.engine.bptt import GradientSet, NoSupervisionError, sequence_loss
from sporadic_rnn.models import TrainConfig
from sporadic_rnn.training.init import init_params
from sporadic_rnn.training.loop import DivergenceError, batch_size, mean_loss, train
from sporadic_rnn.training.metrics import evaluate, masked_errors, predict_batch


@pytest.fixture
def batch(dataset):
    """The six-subject fixture binned at τ = 0.5."""
    return build_batch(dataset, 0.5)


def fresh(cfg: TrainConfig, batch):
    return init_params(cfg, 2, 2, 0.5, np.random.default_rng(cfg.seed))


class TestTrain:
    """Tests for train."""

    def test_patience_one_stops_after_two_epochs(self, batch):
        """One epoch without improvement ends training when patience is 1."""
        cfg = TrainConfig(cell="car_rnn", hidden_multiplier=2, max_epochs=10, patience=1)
        with patch("sporadic_rnn.training.loop.mean_loss", side_effect=[1.0, 2.0, 3.0]):
            result = train(fresh(cfg, batch), batch, batch, cfg)
        assert len(result.history) == 2
        assert result.best_epoch == 1
        assert result.best_val_loss == 1.0
        assert result.stopped_early

    def test_runs_to_max_epochs_while_improving(self, batch):
        """A falling validation loss never triggers early stopping."""
        cfg = TrainConfig(cell="car_rnn", hidden_multiplier=2, max_epochs=4, patience=1)
        with patch("sporadic_rnn.training.loop.mean_loss", side_effect=[4.0, 3.0, 2.0, 1.0]):
            result = train(fresh(cfg, batch), batch, batch, cfg)
        assert list(result.history["epoch"]) == [1, 2, 3, 4]
        assert result.best_epoch == 4
        assert not result.stopped_early

    def test_returns_best_epoch_params(self, batch):
        """The returned parameters are those scored as best on validation."""
        cfg = TrainConfig(cell="car_gru", hidden_multiplier=2, max_epochs=3, patience=5)
        result = train(fresh(cfg, batch), batch, batch, cfg)
        assert mean_loss(result.params, batch) == pytest.approx(result.best_val_loss, rel=1e-12)

    def test_loss_decreases(self, batch):
        """Training lowers the training loss."""
        cfg = TrainConfig(
            cell="car_gru", hidden_multiplier=2, max_epochs=30, patience=30, learning_rate=0.01
        )
        result = train(fresh(cfg, batch), batch, None, cfg)
        assert result.history["train_loss"].iloc[-1] < result.history["train_loss"].iloc[0]

    def test_deterministic(self, batch):
        """The same seed gives bit-identical parameters."""
        cfg = TrainConfig(cell="car_lstm", hidden_multiplier=2, max_epochs=3, seed=4)
        a = train(fresh(cfg, batch), batch, batch, cfg).params
        b = train(fresh(cfg, batch), batch, batch, cfg).params
        for name in a.tensors:
            np.testing.assert_array_equal(a[name], b[name])

    def test_divergence(self, batch):
        """A non-finite loss is reported with its epoch."""
        cfg = TrainConfig(cell="car_rnn", hidden_multiplier=2, max_epochs=3)
        p = fresh(cfg, batch)
        nan_step = (float("nan"), GradientSet.zeros_like(p))
        with patch("sporadic_rnn.training.loop.loss_and_gradients", return_value=nan_step):
            with pytest.raises(DivergenceError, match="diverged at epoch 1") as exc:
                train(p, batch, batch, cfg)
        assert exc.value.epoch == 1


class TestBatchSize:
    """Tests for batch_size and mean_loss."""

    def test_fraction(self):
        """90% of 6 rounds to 5; tiny fractions still give one."""
        assert batch_size(TrainConfig(batch_fraction=0.9), 6) == 5
        assert batch_size(TrainConfig(batch_fraction=0.01), 6) == 1

    def test_mean_loss(self, batch):
        """mean_loss averages the per-sequence loss."""
        cfg = TrainConfig(cell="car_gru", hidden_multiplier=2)
        p = fresh(cfg, batch)
        assert mean_loss(p, batch) == pytest.approx(sequence_loss(p, batch) / len(batch))


class TestMetrics:
    """Tests for masked_errors and evaluate."""

    def test_half_error(self):
        """A constant error of 0.5 gives MAE 0.5 and MSE 0.25."""
        out = masked_errors(np.full((2, 3, 2), 0.5), np.zeros((2, 3, 2)), np.ones((2, 3, 2)))
        assert out == {"mae": 0.5, "mse": 0.25, "n_targets": 12}

    def test_missing_ignored(self):
        """Cells with mask 0 do not count."""
        y = np.array([[1.0, 100.0]])
        out = masked_errors(y, np.zeros((1, 2)), np.array([[1.0, 0.0]]))
        assert out["mae"] == 1.0 and out["n_targets"] == 1

    def test_no_targets(self):
        """Nothing to score is an error."""
        with pytest.raises(NoSupervisionError):
            masked_errors(np.ones(2), np.ones(2), np.zeros(2))

    def test_evaluate(self, batch):
        """evaluate scores predict_batch against the batch targets."""
        cfg = TrainConfig(cell="car_gru", hidden_multiplier=2)
        p = fresh(cfg, batch)
        y = predict_batch(p, batch)
        assert y.shape == batch.targets.shape
        out = evaluate(p, batch)
        assert out == masked_errors(y, batch.targets, batch.target_mask)
        assert out["n_targets"] == int(batch.target_mask.sum())
