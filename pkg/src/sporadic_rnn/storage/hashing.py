"""Content hashing for checkpoints and reports."""

import hashlib
import json

import numpy as np
import pandas as pd


def compute_content_hash(data: dict) -> str:
    """
    Compute a deterministic hash of a mapping's content.

    Args:
        data: JSON-serializable mapping (non-serializable values are stringified).

    Returns:
        A 16-character hex string hash of the content.
    """
    text = json.dumps(data, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def compute_tensor_hash(tensors: dict[str, np.ndarray]) -> str:
    """Hash of named float arrays, exact to the last bit of every value."""
    content = {
        name: {"shape": list(arr.shape), "values": np.asarray(arr, dtype=float).ravel().tolist()}
        for name, arr in tensors.items()
    }
    return compute_content_hash(content)


def compute_frame_hash(df: pd.DataFrame) -> str:
    """Hash of a frame's CSV rendering at 17 significant digits."""
    text = df.to_csv(index=False, float_format="%.17g")
    return hashlib.sha256(text.encode()).hexdigest()[:16]
