"""Synthetic dataset generation behind `sporadic-rnn synth`."""

import logging
from pathlib import Path

from sporadic_rnn.data.csv_io import dataset_frame, write_csv
from sporadic_rnn.data.synthetic import generate_synthetic
from sporadic_rnn.models.process import ProcessSpec
from sporadic_rnn.models.text import format_matrix, format_vector
from sporadic_rnn.pipeline.stages import stage
from sporadic_rnn.storage.config_file import read_key_values, write_key_values
from sporadic_rnn.storage.hashing import compute_frame_hash

log = logging.getLogger(__name__)


def truth_path_for(out_path: Path) -> Path:
    return out_path.with_name(out_path.stem + ".truth.txt")


def write_truth(path: Path, spec: ProcessSpec) -> None:
    """Sidecar with the parameters the data was drawn from."""
    write_key_values(
        path,
        {
            "feature_names": ", ".join(spec.names),
            "drift": format_matrix(spec.drift_matrix),
            "bias": format_vector(spec.bias_vector),
            "diffusion_chol": format_matrix(spec.gamma),
            "seed": str(spec.seed),
        },
        header="true CAR(1) parameters of the generating process",
    )


def synthesize(
    spec_path: Path | str,
    out_path: Path | str,
    seed: int | None = None,
) -> dict:
    """Generate a dataset from a process file and write it as long-format CSV.

    Returns:
        Stats dict with subject/observation counts and output paths.
    """
    out_path = Path(out_path)
    with stage("config"):
        values = read_key_values(spec_path)
        if seed is not None:
            values["seed"] = seed
        spec = ProcessSpec(**values)
    with stage("generate"):
        data = generate_synthetic(spec)
    with stage("write"):
        write_csv(data, out_path)
        truth = truth_path_for(out_path)
        write_truth(truth, spec)

    stats = {
        "subjects": len(data),
        "features": data.n_features,
        "observations": sum(len(s.observations) for s in data),
        "seed": spec.seed,
        "data_path": str(out_path),
        "truth_path": str(truth),
        "data_hash": compute_frame_hash(dataset_frame(data)),
    }
    log.info(f"Synthesis complete: {stats}")
    return stats
