"""End-to-end runs: synthesize, train, evaluate and predict."""

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from sporadic_rnn.cli import cli
from sporadic_rnn.data.binning import bin_series
from sporadic_rnn.data.csv_io import read_csv
from sporadic_rnn.data.examples import make_example
from sporadic_rnn.engine.batch import SequenceBatch
from sporadic_rnn.models import RunConfig
from sporadic_rnn.pipeline import run_eval, run_predict, run_training, synthesize
from sporadic_rnn.pipeline.prediction import rollout
from sporadic_rnn.storage import load_checkpoint, read_report
from sporadic_rnn.training.metrics import predict_batch


def run_config(data, out, **overrides) -> RunConfig:
    values = {
        "data": data,
        "out": out,
        "cell": "car_gru",
        "hidden_multiplier": 2,
        "max_epochs": 4,
        "tau": [0.5],
        "val_fraction": 0.2,
        "test_fraction": 0.25,
        "seed": 1,
    }
    return RunConfig(**{**values, **overrides})


@pytest.fixture
def trained(tmp_path, synthetic_csv):
    """A small CAR-GRU trained on the fixture process."""
    cfg = run_config(synthetic_csv, tmp_path / "run")
    return cfg, run_training(cfg)


class TestTrainEval:
    """Training output and its re-evaluation."""

    def test_outputs_written(self, trained):
        """Checkpoint, history and report land in the run directory."""
        cfg, stats = trained
        for name in ("model.ckpt", "history.csv", "report.txt", "report.csv"):
            assert (cfg.out / name).exists()
        assert read_report(cfg.out / "report")["tensor_hash"] == stats["tensor_hash"]
        assert len(pd.read_csv(cfg.out / "history.csv")) == stats["epochs"]

    def test_eval_reproduces_test_metrics(self, trained):
        """Evaluating the saved checkpoint gives the reported test metrics exactly."""
        cfg, stats = trained
        out = run_eval(cfg.out / "model.ckpt", cfg.data, subset="test")
        assert out["mse"] == stats["test_mse"]
        assert out["mae"] == stats["test_mae"]

    def test_eval_other_splits(self, trained):
        """Train and validation metrics are reproduced too."""
        cfg, stats = trained
        for subset in ("train", "val"):
            out = run_eval(cfg.out / "model.ckpt", cfg.data, subset=subset)
            assert out["mse"] == stats[f"{subset}_mse"]

    def test_deterministic(self, trained, tmp_path):
        """A second run with the same seed produces the same model."""
        cfg, stats = trained
        again = run_training(cfg.model_copy(update={"out": tmp_path / "again"}))
        assert again["tensor_hash"] == stats["tensor_hash"]
        assert again["test_mse"] == stats["test_mse"]

    def test_split_is_disjoint(self, trained):
        """Every subject is in exactly one split."""
        cfg, _ = trained
        _, meta = load_checkpoint(cfg.out / "model.ckpt")
        ids = meta.split["train"] + meta.split["val"] + meta.split["test"]
        assert len(ids) == len(set(ids)) == 12
        assert len(meta.split["test"]) == 3 and len(meta.split["val"]) == 2

    def test_tau_search(self, tmp_path, synthetic_csv):
        """Several τ values are searched and the curve is written."""
        cfg = run_config(synthetic_csv, tmp_path / "search", tau=[0.3, 0.9], max_epochs=2)
        stats = run_training(cfg)
        curve = pd.read_csv(cfg.out / "tau_curve.csv")
        assert list(curve["tau_raw"]) == [0.3, 0.9]
        assert stats["tau"] in (0.3, 0.9)

    def test_default_tau_candidates(self, tmp_path, synthetic_csv):
        """Without τ the candidates come from the training gaps."""
        cfg = run_config(synthetic_csv, tmp_path / "auto", tau=None, max_epochs=2)
        stats = run_training(cfg)
        assert stats["tau"] > 0
        assert (cfg.out / "tau_curve.csv").exists()

    @pytest.mark.parametrize(
        ("cell", "fill"),
        [("gru", "forward"), ("gru", "mean"), ("gru", "nearest_concat"), ("car_lstm", None),
         ("car_rnn", None), ("lstm", None), ("car", None)],
    )
    def test_other_cells(self, tmp_path, synthetic_csv, cell, fill):
        """Every cell kind and baseline fill trains and re-evaluates exactly."""
        cfg = run_config(synthetic_csv, tmp_path / cell, cell=cell, fill=fill, max_epochs=2)
        stats = run_training(cfg)
        assert np.isfinite(stats["test_mse"])
        assert run_eval(cfg.out / "model.ckpt", cfg.data)["mse"] == stats["test_mse"]


class TestPredict:
    """Rollout prediction from a checkpoint."""

    def test_predictions_written(self, trained, tmp_path):
        """Predictions and the per-horizon table are written."""
        cfg, _ = trained
        stats = run_predict(cfg.out / "model.ckpt", cfg.data, 2, tmp_path / "pred")
        frame = pd.read_csv(tmp_path / "pred" / "predictions.csv")
        assert len(frame) == stats["predictions"]
        assert stats["max_horizon"] >= 2
        horizons = pd.read_csv(tmp_path / "pred" / "horizon_errors.csv")
        assert list(horizons["horizon"]) == sorted(horizons["horizon"])
        assert stats["subjects"] == 12
        assert set(frame["feature"]) == {"a", "b"}

    def test_full_context_matches_one_step(self, trained):
        """With every bin as context the rollout equals one-step-ahead prediction."""
        cfg, _ = trained
        params, meta = load_checkpoint(cfg.out / "model.ckpt")
        data = meta.standardizer.transform(read_csv(cfg.data, feature_names=meta.feature_names))
        seq = bin_series(data.series[0], meta.tau, data.n_features)
        preds = rollout(params, seq, n_context=seq.n_bins)
        batch = SequenceBatch.from_examples([make_example(seq)], meta.tau)
        np.testing.assert_allclose(preds, predict_batch(params, batch)[0], rtol=1e-12, atol=1e-12)


class TestCommandLine:
    """The same flow through the CLI."""

    def test_synth_train_eval_predict(self, tmp_path, process_file):
        """Every command succeeds and eval matches train."""
        runner = CliRunner()
        data = tmp_path / "synth.csv"
        run_dir = tmp_path / "run"
        result = runner.invoke(cli, ["synth", "--config", str(process_file), "--out", str(data)])
        assert result.exit_code == 0, result.output

        cfg = tmp_path / "run.cfg"
        cfg.write_text("hidden_multiplier = 2\ntau = 0.5\nval_fraction = 0.2\n")
        result = runner.invoke(
            cli,
            ["train", "--config", str(cfg), "--data", str(data), "--out", str(run_dir),
             "--max-epochs", "3", "--seed", "2"],
        )
        assert result.exit_code == 0, result.output
        reported = read_report(run_dir / "report")

        result = runner.invoke(
            cli, ["eval", "--model", str(run_dir / "model.ckpt"), "--data", str(data)]
        )
        assert result.exit_code == 0, result.output
        assert f"mse: {reported['test_mse']}" in result.output

        result = runner.invoke(
            cli,
            ["predict", "--model", str(run_dir / "model.ckpt"), "--data", str(data),
             "--n-context", "3", "--out", str(tmp_path / "pred")],
        )
        assert result.exit_code == 0, result.output
        assert (tmp_path / "pred" / "predictions.csv").exists()

    def test_synth_is_reproducible(self, tmp_path, process_file):
        """Two runs with one seed produce identical files."""
        a = synthesize(process_file, tmp_path / "a.csv")
        b = synthesize(process_file, tmp_path / "b.csv")
        assert a["data_hash"] == b["data_hash"]
        assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()
