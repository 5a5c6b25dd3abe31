"""Command-line interface for sporadic-rnn using Click."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import click

from sporadic_rnn.models import ALL_CELL_TYPES, FillMode
from sporadic_rnn.pipeline import (
    StageError,
    run_eval,
    run_gradcheck,
    run_predict,
    run_training,
    stage,
    synthesize,
)
from sporadic_rnn.pipeline.gradcheck import GRADCHECK_CELLS
from sporadic_rnn.storage import resolve_run_config, write_frame

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

GRADCHECK_FAILED = 2


class StageFailure(click.ClickException):
    """A pipeline stage failed; printed as one machine-parsable line."""

    exit_code = 1

    def show(self, file=None):
        click.echo(self.message, err=True)


@contextmanager
def reported() -> Iterator[None]:
    try:
        yield
    except StageError as e:
        raise StageFailure(str(e)) from e


def echo_stats(title: str, stats: dict) -> None:
    click.echo(title)
    for key, value in stats.items():
        click.echo(f"  {key}: {value}")


@click.group()
@click.version_option(version="0.1.0")
@click.option("--verbose", "-v", is_flag=True, help="Log per-epoch detail.")
def cli(verbose):
    """Sporadic RNN - CAR-corrected recurrent networks for irregular, asynchronous series."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path),
              help="Process file (key = value) with drift, bias, diffusion_chol, ...")
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output CSV path.")
@click.option("--seed", type=int, help="Override the process file's seed.")
def synth(config_path, out, seed):
    """Simulate a sporadic dataset from a known CAR(1) process."""
    with reported():
        stats = synthesize(config_path, out, seed=seed)
    echo_stats("Synthesis completed:", stats)


@cli.command()
@click.option("--data", type=click.Path(path_type=Path), help="Long-format CSV.")
@click.option("--config", "config_path", type=click.Path(path_type=Path),
              help="Run file (key = value); flags override it.")
@click.option("--out", type=click.Path(path_type=Path), help="Run directory.")
@click.option("--seed", type=int, help="Split, initialization and shuffling seed.")
@click.option("--cell", type=click.Choice(ALL_CELL_TYPES), help="Cell kind.")
@click.option("--fill", type=click.Choice([f.value for f in FillMode] + ["none"]),
              help="Baseline fill instead of CAR imputation.")
@click.option("--tau", help="Bin width, or comma-separated candidates, in data time units.")
@click.option("--max-epochs", type=int, help="Epoch limit.")
def train(data, config_path, out, seed, cell, fill, tau, max_epochs):
    """Train a model and report MAE/MSE on train/val/test."""
    with reported():
        with stage("config"):
            cfg = resolve_run_config(
                config_path,
                {
                    "data": data,
                    "out": out,
                    "seed": seed,
                    "cell": cell,
                    "fill": fill,
                    "tau": tau,
                    "max_epochs": max_epochs,
                },
            )
        stats = run_training(cfg)
    echo_stats("Training completed:", stats)


@cli.command(name="eval")
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path),
              help="Checkpoint file.")
@click.option("--data", required=True, type=click.Path(path_type=Path), help="Long-format CSV.")
@click.option("--subset", type=click.Choice(["test", "val", "train", "all"]), default="test",
              show_default=True, help="Subjects to evaluate, by the checkpoint's split.")
@click.option("--out", type=click.Path(path_type=Path), help="Directory for eval.{txt,csv}.")
def evaluate(model_path, data, subset, out):
    """Evaluate a checkpoint on a data file."""
    with reported():
        stats = run_eval(model_path, data, out=out, subset=subset)
    echo_stats("Evaluation completed:", stats)


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path),
              help="Checkpoint file.")
@click.option("--data", required=True, type=click.Path(path_type=Path), help="Long-format CSV.")
@click.option("--n-context", type=int, default=1, show_default=True,
              help="Observed bins consumed before predictions are fed back.")
@click.option("--subset", type=click.Choice(["test", "val", "train", "all"]), default="all",
              show_default=True, help="Subjects to predict, by the checkpoint's split.")
@click.option("--out", required=True, type=click.Path(path_type=Path), help="Output directory.")
def predict(model_path, data, n_context, subset, out):
    """Roll a checkpoint forward from the first bins of each subject."""
    with reported():
        stats = run_predict(model_path, data, n_context, out, subset=subset)
    echo_stats("Prediction completed:", stats)


@cli.command()
@click.argument("cell", type=click.Choice(list(GRADCHECK_CELLS) + ["all"]), default="all")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--configs", "n_configs", type=int, default=5, show_default=True,
              help="Random problems per variant.")
@click.option("--out", type=click.Path(path_type=Path), help="Write the full report as CSV.")
@click.pass_context
def gradcheck(ctx, cell, seed, n_configs, out):
    """Check analytic gradients against finite differences."""
    with reported(), stage("gradcheck"):
        report, stats = run_gradcheck(cell, seed=seed, n_configs=n_configs)
    worst = report.groupby("param")["max_rel_err"].max().sort_values(ascending=False)
    click.echo("Max relative error per parameter:")
    for name, err in worst.items():
        click.echo(f"  {name}: {err:.3e}")
    if out is not None:
        write_frame(out, report)
    echo_stats("Gradient check:", stats)
    if not stats["passed"]:
        for _, row in report.loc[~report["passed"]].iterrows():
            click.echo(
                f"FAIL {row['variant']} config={row['config']} param={row['param']} "
                f"index={row['index']} analytic={row['analytic']:.10g} "
                f"numeric={row['numeric']:.10g} rel_err={row['max_rel_err']:.3e}",
                err=True,
            )
        ctx.exit(GRADCHECK_FAILED)


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
