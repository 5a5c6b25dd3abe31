"""Checkpoints, configuration files, content hashes and reports."""

from sporadic_rnn.storage.checkpoint import (
    CheckpointError,
    CheckpointMeta,
    load_checkpoint,
    meta_for,
    save_checkpoint,
)
from sporadic_rnn.storage.config_file import (
    read_key_values,
    resolve_run_config,
    write_key_values,
)
from sporadic_rnn.storage.hashing import (
    compute_content_hash,
    compute_frame_hash,
    compute_tensor_hash,
)
from sporadic_rnn.storage.reports import read_report, write_frame, write_report

__all__ = [
    # Checkpoints
    "CheckpointError",
    "CheckpointMeta",
    "load_checkpoint",
    "meta_for",
    "save_checkpoint",
    # Config files
    "read_key_values",
    "write_key_values",
    "resolve_run_config",
    # Hashing
    "compute_content_hash",
    "compute_frame_hash",
    "compute_tensor_hash",
    # Reports
    "write_report",
    "write_frame",
    "read_report",
]
