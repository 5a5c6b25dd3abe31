"""Training examples and padded batches.

An example holds the input rows (time points 1..K−1 of a binned sequence) with
their imputation sources, and the one-step-ahead targets (time points 2..K).
"""

from dataclasses import dataclass, fields

import numpy as np

from sporadic_rnn.engine.numerics import ShapeError


@dataclass
class Example:
    """One subject's inputs, targets and gaps; all arrays have K rows.

    Missing inputs and targets are stored as 0 and flagged by the masks.
    """

    subject_id: str
    inputs: np.ndarray         # K×N_in
    input_mask: np.ndarray     # K×N_in, 1 = observed
    source_values: np.ndarray  # K×N_in, value an imputed cell is carried from
    gaps: np.ndarray           # K×N_in, signed carry distance
    imputable: np.ndarray      # K×N_in, bool
    targets: np.ndarray        # K×Q
    target_mask: np.ndarray    # K×Q
    delta_t: np.ndarray        # K

    def __post_init__(self):
        k = self.delta_t.shape[0]
        for f in fields(self):
            arr = getattr(self, f.name)
            if isinstance(arr, np.ndarray) and arr.shape[0] != k:
                raise ShapeError(f"{f.name} has {arr.shape[0]} rows, expected {k}")

    @property
    def n_steps(self) -> int:
        return self.delta_t.shape[0]


@dataclass
class SequenceBatch:
    """Examples padded to a common length and stacked along a leading batch axis.

    Padded steps have zero masks and a gap equal to τ, so they neither move the
    state through the CAR correction nor contribute to the loss.
    """

    subject_ids: list[str]
    inputs: np.ndarray
    input_mask: np.ndarray
    source_values: np.ndarray
    gaps: np.ndarray
    imputable: np.ndarray
    targets: np.ndarray
    target_mask: np.ndarray
    delta_t: np.ndarray
    lengths: np.ndarray

    def __len__(self) -> int:
        return len(self.subject_ids)

    @property
    def n_steps(self) -> int:
        return self.delta_t.shape[1]

    @classmethod
    def from_examples(cls, examples: list[Example], tau: float) -> "SequenceBatch":
        if not examples:
            raise ValueError("cannot batch zero examples")
        k_max = max(e.n_steps for e in examples)
        pad_gap = tau if tau > 0 else 1.0

        def stack(name: str, fill=0.0) -> np.ndarray:
            rows = []
            for e in examples:
                arr = getattr(e, name)
                pad = [(0, k_max - arr.shape[0])] + [(0, 0)] * (arr.ndim - 1)
                rows.append(np.pad(arr, pad, constant_values=fill))
            return np.stack(rows)

        return cls(
            subject_ids=[e.subject_id for e in examples],
            inputs=stack("inputs"),
            input_mask=stack("input_mask"),
            source_values=stack("source_values"),
            gaps=stack("gaps"),
            imputable=stack("imputable", False),
            targets=stack("targets"),
            target_mask=stack("target_mask"),
            delta_t=stack("delta_t", pad_gap),
            lengths=np.array([e.n_steps for e in examples]),
        )

    def astype(self, dtype) -> "SequenceBatch":
        """Copy with every float array cast to `dtype`."""
        cast = {}
        for name in ("inputs", "input_mask", "source_values", "gaps", "targets",
                     "target_mask", "delta_t"):
            cast[name] = getattr(self, name).astype(dtype)
        return SequenceBatch(
            subject_ids=self.subject_ids,
            imputable=self.imputable,
            lengths=self.lengths,
            **cast,
        )

    def select(self, rows) -> "SequenceBatch":
        """Sub-batch of the given row indices."""
        rows = np.asarray(rows)
        arrays = {
            name: getattr(self, name)[rows]
            for name in ("inputs", "input_mask", "source_values", "gaps", "imputable",
                         "targets", "target_mask", "delta_t", "lengths")
        }
        return SequenceBatch(subject_ids=[self.subject_ids[i] for i in rows], **arrays)
