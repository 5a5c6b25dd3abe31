"""Orchestration behind each command; every entry point returns a stats dict."""

from sporadic_rnn.pipeline.gradcheck import check_gradients, random_problem, run_gradcheck, variants
from sporadic_rnn.pipeline.prediction import horizon_table, rollout, run_eval, run_predict
from sporadic_rnn.pipeline.stages import StageError, stage
from sporadic_rnn.pipeline.synthesis import synthesize
from sporadic_rnn.pipeline.training import prepare_data, run_training, split_subjects

__all__ = [
    # Stages
    "StageError",
    "stage",
    # Synthesis
    "synthesize",
    # Training
    "prepare_data",
    "run_training",
    "split_subjects",
    # Evaluation and prediction
    "run_eval",
    "run_predict",
    "rollout",
    "horizon_table",
    # Gradient check
    "check_gradients",
    "random_problem",
    "run_gradcheck",
    "variants",
]
